pub mod cbam_oracle;

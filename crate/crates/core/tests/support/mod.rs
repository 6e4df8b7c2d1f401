pub mod tree_oracle;

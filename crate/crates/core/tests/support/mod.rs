pub mod causal_oracle;

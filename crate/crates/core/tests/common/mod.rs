pub mod chem_oracle;

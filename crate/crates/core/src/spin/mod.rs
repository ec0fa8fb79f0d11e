//! Donor electron–nuclear Hamiltonian with full state mixing.

mod donor;
mod operators;

pub use donor::{
    build_donor_hamiltonian, df_db, df_db_closed_form, df_db_step, eigensystem, electron_operators, sx_element,
    transition_frequency, Branch, DonorEigensystem, DonorOperators, DonorSpec, DoubletLevel, TransitionSpec, DFDB_STEP,
    HBAR,
};
pub use operators::{build_spin_matrices, SpinOperators};

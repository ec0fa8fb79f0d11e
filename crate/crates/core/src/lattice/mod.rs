//! Diamond-cubic silicon lattices, random ²⁹Si baths and their couplings.

mod bath;
mod clusters;
mod contact;
mod diamond;
mod dipolar;

pub use bath::{polar_angle, sample_bath, BathConfiguration, BathModel, BathPair, BathSite, DEFAULT_PAIR_SHELL};
pub use clusters::{enumerate_clusters, Cluster};
pub use contact::{
    ContactModel, BI_IONIZATION_EV, DEFAULT_DENSITY_ENHANCEMENT, EFFECTIVE_MASS_ENERGY_EV, KL_RADIUS_PAR,
    KL_RADIUS_PERP, MU0, VALLEY_POSITION,
};
pub use diamond::{
    generate_lattice, is_diamond_site, neighbor_distance, neighbor_shell_sq, Lattice, LatticeSpec, SI29_ABUNDANCE,
    SI_LATTICE_CONSTANT,
};
pub use dipolar::{dipolar_prefactor, dipolar_tensor, secular_pair_coupling, DipolarTensor, PairCoupling};

//! Fixtures shared by the kernel benchmarks.

use adder_core::dynamics::{MasterEquation, NoiseSpec};
use adder_core::harness::{scenario, scenario_inputs};
use adder_core::model::TimeDependentHamiltonian;
use adder_core::protocol::{HamiltonianPath, ProtocolModel};
use adder_core::tensor::{qutrit_state, CMatrix, QuantumState};
use adder_core::Level;

pub struct Fixture {
    pub model: ProtocolModel,
    pub noise: NoiseSpec,
    pub hamiltonian: TimeDependentHamiltonian,
    pub rho: CMatrix,
    pub psi: QuantumState,
}

/// fig4a at `k = 10` with `truncation` Fock levels per cavity.
pub fn fixture(truncation: usize) -> Fixture {
    let mut s = scenario("fig4a").expect("registered");
    s.truncation = truncation;
    let (model, noise) = s.model(10.0, 0.0, 1.0).expect("valid parameters");
    let hamiltonian = model.hamiltonian(HamiltonianPath::Full).expect("hamiltonian");
    let (a, b) = scenario_inputs(&s).expect("inputs fit");
    let q = qutrit_state(Level::G) + qutrit_state(Level::F);
    let psi = QuantumState::product(model.layout, &q.normalize(), &a, &b).expect("product");
    Fixture {
        rho: psi.density_matrix(),
        psi,
        model,
        noise,
        hamiltonian,
    }
}

pub fn master_equation(f: &Fixture) -> MasterEquation {
    MasterEquation::new(&f.hamiltonian, &f.noise).expect("master equation")
}

//! The broken-geodesic space `E_b`, its gradient vector field and action,
//! flow integration, singular circles, the invariant disk mesh, and the
//! finite-order approximation built from it.

mod flow;
mod state;
mod system;

pub use flow::{
    flow, flow_with, lipschitz_certificate, zeta_lipschitz_bound, FlowControl, FlowTrajectory,
};
pub use state::StateVector;
pub use system::{
    a_ab, c_ab, linking_form, linking_form_alt, loop_winding, singular_circles, FlowSystem,
    SingularCircle,
};

mod jsp;
mod native;
mod progen;

pub use jsp::{generate_jsp, jsp_to_rcpsp, parse_jsp, write_jsp, JspInstance, Operation};
pub use native::{parse_native, write_native, NATIVE_VERSION};
pub use progen::{parse_progen_max, write_progen_max};

//! Columnar dataframe that stores each string column according to its
//! cardinality: low-cardinality strings as dictionary codes in the numeric
//! block, high-cardinality strings in an offset-addressed pool.

pub mod encoding;
pub mod error;
pub mod exec;
pub mod expr;
pub mod frame;
pub mod groupby;
pub mod io;
pub mod join;
pub mod oracle;
pub mod value;

pub use error::{Error, Result};
pub use exec::{with_threads, BuildSide, ExecOptions, GroupStrategy, JoinMode, KeyHash};
pub use frame::{ColumnMeta, Frame, FrameBuilder, SortKey, StringPool};
pub use value::{LogicalDtype, Value};

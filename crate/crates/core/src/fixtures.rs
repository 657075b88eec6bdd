//! Small reference instances shared by tests, examples and the CLI.

use crate::construct::ValueTable;
use crate::mvnn::{Layer, MvnnParams};

/// Values of the three-item example, indexed by bundle integer (item 0 least significant):
/// `000→0, 100→1, 010→1, 110→1, 001→1, 101→3, 011→2, 111→4`.
pub const THREE_ITEM_VALUES: [f64; 8] = [0.0, 1.0, 1.0, 1.0, 1.0, 3.0, 2.0, 4.0];

pub fn three_item_table() -> ValueTable {
    ValueTable::new(3, THREE_ITEM_VALUES.to_vec()).expect("reference table is monotone")
}

/// Two-neuron network that reproduces [`three_item_table`] exactly.
pub fn three_item_network() -> MvnnParams {
    let l1 = Layer::from_rows(&[vec![1.0, 1.0, 1.0], vec![0.5, 0.25, 1.0]], vec![0.0, -1.0])
        .expect("shape");
    let readout = Layer::from_rows(&[vec![1.0, 4.0]], vec![0.0]).expect("shape");
    MvnnParams::new(1.0, vec![l1, readout]).expect("valid reference network")
}

/// A network that is identically zero on `items` inputs.
pub fn zero_network(items: usize, hidden: usize) -> MvnnParams {
    MvnnParams::new(1.0, vec![Layer::zeros(hidden, items), Layer::zeros(1, hidden)])
        .expect("valid zero network")
}

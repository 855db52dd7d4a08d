//! Published reference numbers and comparisons against computed tables.

use crate::stability::{IterationMode, StabilityRow};
use crate::stencil::Delta;

/// One resolution of a published convergence table: `(L1, L2, Linf)` and printed rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub errors: [f64; 3],
    pub rates: Option<[f64; 3]>,
}

const fn row(n: usize, errors: [f64; 3], rates: Option<[f64; 3]>) -> ErrorRow {
    ErrorRow { n, errors, rates }
}

/// Advection, `T = 0.5`, orders 1 to 3.
pub const ADVECTION_T05: [[ErrorRow; 5]; 3] = [
    [
        row(50, [2.75963992e-2, 3.89822088e-2, 2.49972343e-2], None),
        row(100, [1.31966826e-2, 1.86553914e-2, 1.18893785e-2], Some([1.43, 1.43, 1.43])),
        row(200, [6.94037229e-3, 9.81052034e-3, 6.26028096e-3], Some([1.33, 1.33, 1.33])),
        row(400, [3.47535103e-3, 4.91373939e-3, 3.13191721e-3], Some([1.38, 1.38, 1.38])),
        row(800, [1.73895701e-3, 2.45900149e-3, 1.56634545e-3], Some([1.38, 1.38, 1.38])),
    ],
    [
        row(50, [4.83627617e-3, 6.70434069e-3, 4.40502120e-3], None),
        row(100, [1.21754361e-3, 1.70489808e-3, 1.10206485e-3], Some([2.07, 2.06, 2.08])),
        row(200, [3.05118738e-4, 4.29379230e-4, 2.75470491e-4], Some([2.07, 2.07, 2.08])),
        row(400, [7.60697367e-5, 1.07314205e-4, 6.85840860e-5], Some([2.08, 2.08, 2.08])),
        row(800, [1.89899602e-5, 2.68216700e-5, 1.71091069e-5], Some([2.08, 2.08, 2.08])),
    ],
    [
        row(50, [2.01420626e-5, 2.78967473e-5, 1.83221455e-5], None),
        row(100, [1.22373888e-6, 1.71345209e-6, 1.10817064e-6], Some([3.49, 3.48, 3.49])),
        row(200, [7.58582317e-8, 1.06747542e-7, 6.84816328e-8], Some([3.47, 3.47, 3.47])),
        row(400, [4.72452033e-9, 6.66496769e-9, 4.25998525e-9], Some([3.47, 3.47, 3.47])),
        row(800, [2.94836794e-10, 4.16430973e-10, 2.65634292e-10], Some([3.47, 3.47, 3.47])),
    ],
];

/// Advection, `T = 10`, orders 1 to 3.
pub const ADVECTION_T10: [[ErrorRow; 5]; 3] = [
    [
        row(50, [0.374521524, 0.529551387, 0.337824076], None),
        row(100, [0.222015068, 0.313846916, 0.200003594], Some([1.22, 1.22, 1.21])),
        row(200, [0.121430904, 0.171709701, 0.109344706], Some([1.23, 1.30, 1.3])),
        row(400, [6.35740533e-2, 8.99051651e-2, 5.72395548e-2], Some([1.34, 1.34, 1.34])),
        row(800, [3.25359367e-2, 4.60121371e-2, 2.92929020e-2], Some([1.36, 1.36, 1.36])),
    ],
    [
        row(50, [9.76886451e-2, 0.135240585, 8.88576061e-2], None),
        row(100, [2.43498404e-2, 3.40924263e-2, 2.20487341e-2], Some([2.08, 2.07, 2.09])),
        row(200, [6.06694631e-3, 8.53730459e-3, 5.47759095e-3], Some([2.08, 2.08, 2.08])),
        row(400, [1.51354610e-3, 2.13514664e-3, 1.36459176e-3], Some([2.08, 2.08, 2.08])),
        row(800, [3.77953198e-4, 5.33837010e-4, 3.40518804e-4], Some([2.08, 2.08, 2.08])),
    ],
    [
        row(50, [3.99626675e-4, 5.54330298e-4, 3.63966072e-4], None),
        row(100, [2.44519597e-5, 3.42405583e-5, 2.21427508e-5], Some([3.48, 3.47, 3.49])),
        row(200, [1.51620566e-6, 2.13338581e-6, 1.36890401e-6], Some([3.47, 3.47, 3.47])),
        row(400, [9.44495966e-8, 1.33241784e-7, 8.51629025e-8], Some([3.47, 3.47, 3.47])),
        row(800, [5.89182880e-9, 8.32168912e-9, 5.30826449e-9], Some([3.46, 3.47, 3.46])),
    ],
];

pub fn advection_golden(order: usize, final_time: f64) -> Option<&'static [ErrorRow; 5]> {
    let table = if final_time == 0.5 {
        &ADVECTION_T05
    } else if final_time == 10.0 {
        &ADVECTION_T10
    } else {
        return None;
    };
    table.get(order.checked_sub(1)?)
}

/// A published stability entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    /// Stable for every CFL.
    Unconditional,
    /// Stable for every CFL with `|G| = 1` somewhere.
    Neutral,
    /// Stable up to the given CFL.
    UpTo(f64),
    /// Stable at least up to the given CFL.
    AtLeast(f64),
    /// Unstable for every CFL.
    Unstable,
}

impl Cell {
    /// Lower bound on `lambda*`; zero for unstable cells.
    pub fn bound(self) -> f64 {
        match self {
            Cell::Unconditional | Cell::Neutral => 2.0,
            Cell::UpTo(x) | Cell::AtLeast(x) => x,
            Cell::Unstable => 0.0,
        }
    }

    pub fn label(self) -> String {
        match self {
            Cell::Unconditional => "unconditional".into(),
            Cell::Neutral => "unconditional(|G|=1)".into(),
            Cell::UpTo(x) => format!("{x}"),
            Cell::AtLeast(x) => format!(">={x}"),
            Cell::Unstable => "0".into(),
        }
    }
}

use Cell::{AtLeast, Neutral, Unconditional, Unstable, UpTo};

/// Implicit schemes: rows `d1, d2, d31, d32`, columns time order 1 to 3.
pub const DIRECT: [[Cell; 3]; 4] = [
    [Unconditional, Unconditional, Unconditional],
    [Unconditional, Unconditional, UpTo(4.5)],
    [Unconditional, Neutral, Neutral],
    [Unconditional, Unconditional, UpTo(2.25)],
];

/// Jacobi DEC: `[order 2, order 3]`, rows `d1, d2, d31, d32`, columns 1 to 6 sweeps.
pub const DEC: [[[Cell; 6]; 4]; 2] = [
    [
        [UpTo(1.0), UpTo(1.0), UpTo(1.0), UpTo(1.0), UpTo(1.0), UpTo(1.0)],
        [Unstable, AtLeast(0.85), AtLeast(1.22), AtLeast(1.02), AtLeast(1.08), AtLeast(1.23)],
        [Unstable, Unstable, AtLeast(1.45), AtLeast(1.45), AtLeast(0.002), AtLeast(0.01)],
        [Unstable, AtLeast(0.5), AtLeast(0.69), UpTo(0.71), UpTo(0.73), UpTo(0.73)],
    ],
    [
        [UpTo(6.0), AtLeast(1.5), AtLeast(1.87), AtLeast(2.0), AtLeast(2.23), AtLeast(2.48)],
        [Unstable, Unstable, UpTo(1.0), AtLeast(2.0447), AtLeast(2.17120), AtLeast(2.568)],
        [Unstable, Unstable, Unstable, AtLeast(1.6171), AtLeast(2.4727), AtLeast(2.9162)],
        [Unstable, Unstable, AtLeast(0.1), AtLeast(1.3096), AtLeast(1.3955), AtLeast(1.8282)],
    ],
];

/// Third order, `[Gauss-Seidel, Jacobi]`, rows `d1, d2, d31, d32`, columns 1 to 5 sweeps.
pub const SWEEPS: [[[Cell; 5]; 4]; 2] = [
    [
        [UpTo(1.5), UpTo(1.276906714), UpTo(1.167201858), UpTo(1.197067146), UpTo(1.152628955)],
        [Unstable, AtLeast(1.65), AtLeast(1.47), AtLeast(1.435), AtLeast(1.55)],
        [Unstable, AtLeast(0.926), AtLeast(1.775), Unstable, Unstable],
        [Unstable, AtLeast(0.917), UpTo(0.8754013933), AtLeast(0.89), AtLeast(0.86)],
    ],
    [
        [UpTo(1.0), UpTo(1.0), UpTo(1.256372663), UpTo(1.392646782), UpTo(1.774161172)],
        [Unstable, AtLeast(0.87), AtLeast(1.625), AtLeast(1.744), AtLeast(2.06)],
        [Unstable, Unstable, AtLeast(1.25), AtLeast(2.06), AtLeast(2.52)],
        [Unstable, Unstable, AtLeast(0.905), AtLeast(1.044), AtLeast(1.321)],
    ],
];

fn delta_index(d: Delta) -> usize {
    Delta::ALL.iter().position(|&x| x == d).expect("listed delta")
}

/// Which published stability table a row is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityTable {
    Direct,
    Dec,
    Sweeps,
}

/// Published entry for a computed stability row, if the table holds one.
pub fn stability_golden(table: StabilityTable, row: &StabilityRow) -> Option<Cell> {
    let d = delta_index(row.delta);
    let col = |len: usize| row.iterations.checked_sub(1).filter(|&c| c < len);
    match (table, row.mode) {
        (StabilityTable::Direct, IterationMode::Direct) => DIRECT[d].get(row.time_order.checked_sub(1)?).copied(),
        (StabilityTable::Dec, IterationMode::DecJacobi) if (2..=3).contains(&row.time_order) => {
            Some(DEC[row.time_order - 2][d][col(6)?])
        }
        (StabilityTable::Sweeps, IterationMode::DecGaussSeidel) if row.time_order == 3 => Some(SWEEPS[0][d][col(5)?]),
        (StabilityTable::Sweeps, IterationMode::DecJacobi) if row.time_order == 3 => Some(SWEEPS[1][d][col(5)?]),
        _ => None,
    }
}

/// Result of comparing one computed value with its published cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellDiff {
    pub computed: f64,
    pub published: Cell,
    pub ok: bool,
}

/// `UpTo` and `AtLeast` cells pass when `computed >= x - slack`; unstable cells
/// when `computed < 0.01`; unconditional cells when `computed >= 2`.
pub fn compare_cell(computed: f64, published: Cell, slack: f64) -> CellDiff {
    let ok = match published {
        Unstable => computed < 0.01,
        Unconditional | Neutral => computed >= 2.0,
        UpTo(x) | AtLeast(x) => computed >= x - slack,
    };
    CellDiff { computed, published, ok }
}

/// Computed rows that have a published entry, with the comparison.
pub fn diff_stability(table: StabilityTable, rows: &[StabilityRow], slack: f64) -> Vec<(StabilityRow, CellDiff)> {
    rows.iter()
        .filter_map(|r| stability_golden(table, r).map(|c| (r.clone(), compare_cell(r.max_cfl, c, slack))))
        .collect()
}

//! The 20-node benchmark network. Target module: `G_{3,4} = -0.3 q^-1 + 0.8 q^-2`.

use crate::network::model::NetworkModel;
use crate::scalar::Real;
use crate::tf::RationalTf;

pub const CASE_STUDY_NODES: usize = 20;

/// Target edge `(j, i)` of the case study.
pub const CASE_STUDY_TARGET: (usize, usize) = (3, 4);

type EdgeRow = (usize, usize, &'static [f64], &'static [f64]);

const ONE: &[f64] = &[1.0];

#[rustfmt::skip]
const EDGES: &[EdgeRow] = &[
    (2, 1, &[-1.1576491e-01, 4.2048459e-02], ONE),
    (2, 6, &[-4.9391907e-01, 2.3094301e-01], ONE),
    (2, 8, &[-3.8295603e-01, 3.7364537e-01], ONE),
    (3, 2, &[-2.3501597e-01, 2.2411979e-01], ONE),
    (3, 4, &[0.0, -0.3, 0.8], ONE),
    (3, 5, &[0.0, -0.5], ONE),
    (3, 9, &[-1.5484356e-01, 3.5947903e-01], ONE),
    (4, 2, &[-3.4361929e-01, 2.7664996e-01], ONE),
    (4, 3, &[0.0, 1.0], ONE),
    (4, 6, &[-4.4565148e-02, 3.1267256e-02], ONE),
    (4, 8, &[-3.0217221e-02, 4.9084253e-01], ONE),
    (5, 1, &[-4.4755747e-01, 1.5153359e-01], ONE),
    (5, 4, &[0.0, 0.5], ONE),
    (5, 6, &[-1.8258082e-02, 2.5655941e-02], ONE),
    (6, 4, &[-4.0083967e-02, 2.3831631e-02], ONE),
    (6, 5, &[-4.9526830e-02, 1.8655891e-02], ONE),
    (7, 8, &[-4.2353188e-02, 1.7016841e-03], ONE),
    (7, 12, &[-3.8831215e-01, 1.6625282e-01], ONE),
    (7, 14, &[-1.3013545e-01, 3.2468616e-01], ONE),
    (8, 5, &[-4.8312501e-01, 2.9208833e-01], ONE),
    (8, 7, &[-4.3341455e-02, 2.6095021e-02], ONE),
    (8, 12, &[-2.0610019e-01, 2.6998910e-01], ONE),
    (8, 13, &[-1.4342078e-02, 3.4009137e-02], ONE),
    (9, 2, &[-2.0348115e-01, 6.7364494e-02], ONE),
    (9, 6, &[-2.9096829e-01, 6.1878182e-02], ONE),
    (9, 8, &[-4.7096177e-01, 1.6149849e-01], ONE),
    (9, 10, &[-3.6050395e-02, 4.1517977e-02], ONE),
    (9, 12, &[-3.1296376e-02, 1.1860562e-01], ONE),
    (10, 8, &[-3.0338765e-01, 4.1470173e-01], ONE),
    (10, 9, &[-3.4408597e-02, 2.3732489e-03], ONE),
    (10, 12, &[-3.4207005e-02, 4.4904179e-02], ONE),
    (11, 10, &[0.0, 2.4710993e-01], &[1.0, -5.0578013e-01]),
    (11, 12, &[0.0, 2.4512609e-02], &[1.0, -5.0974782e-01]),
    (11, 16, &[0.0, 2.3010071e-01], &[1.0, -5.3979857e-01]),
    (12, 10, &[0.0, 2.0528463e-02], &[1.0, -5.8943074e-01]),
    (12, 11, &[0.0, 2.1646986e-02], &[1.0, -5.6706027e-01]),
    (12, 14, &[0.0, 2.0877819e-01], &[1.0, -5.8244362e-01]),
    (12, 18, &[0.0, 2.0657294e-01], &[1.0, -5.8685411e-01]),
    (13, 8, &[0.0, 2.1848002e-02], &[1.0, -5.6303996e-01]),
    (13, 11, &[0.0, 2.2137643e-01], &[1.0, -5.5724714e-01]),
    (13, 14, &[0.0, 2.2709971e-02], &[1.0, -5.4580058e-01]),
    (14, 13, &[0.0, 2.2787928e-02], &[1.0, -5.4424144e-01]),
    (14, 15, &[0.0, 2.4571974e-01], &[1.0, -5.0856052e-01]),
    (15, 16, &[0.0, 2.4854075e-01], &[1.0, -5.0291850e-01]),
    (15, 18, &[0.0, 2.0964010e-01], &[1.0, -5.8071980e-01]),
    (16, 13, &[0.0, 2.1627442e-01], &[1.0, -5.6745117e-01]),
    (17, 16, &[0.0, 2.3606224e-01], &[1.0, -5.2787553e-01]),
    (17, 18, &[0.0, 2.4035419e-02], &[1.0, -5.1929163e-01]),
    (17, 19, &[0.0, 2.3030840e-01], &[1.0, -5.3938319e-01]),
    (18, 10, &[0.0, 2.1838053e-01], &[1.0, -5.6323893e-01]),
    (18, 17, &[0.0, 2.3869253e-02], &[1.0, -5.2261494e-01]),
    (19, 12, &[0.0, 2.4800810e-01], &[1.0, -5.0398380e-01]),
    (19, 14, &[0.0, 2.4554410e-01], &[1.0, -5.0891181e-01]),
    (19, 18, &[0.0, 2.3382918e-01], &[1.0, -5.3234164e-01]),
    (20, 12, &[0.0, 2.1965134e-01], &[1.0, -5.6069731e-01]),
    (20, 13, &[0.0, 2.2859570e-01], &[1.0, -5.4280860e-01]),
];

/// Builds the 20-node benchmark network.
pub fn build_case_study<T: Real>() -> NetworkModel<T> {
    let edges = EDGES.iter().map(|&(j, i, num, den)| {
        let num: Vec<T> = num.iter().map(|&c| T::lit(c)).collect();
        let den: Vec<T> = den.iter().map(|&c| T::lit(c)).collect();
        ((j, i), RationalTf::from_coeffs(&num, &den).expect("monic denominators"))
    });
    NetworkModel::new(CASE_STUDY_NODES, edges).expect("case-study network is well posed")
}

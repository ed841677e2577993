use num_complex::Complex64;
use wkb_normal_form::newton::invert_dominant_block;
use wkb_normal_form::*;

fn main() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    let m = 1usize;
    let nh = 8;
    let nz = 90;
    let t = HSeries::new(
        (0..=nh)
            .map(|_| {
                ZSeries::new(
                    (0..=nz)
                        .map(|_| Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)))
                        .collect(),
                )
            })
            .collect(),
    )
    .unwrap();
    let x = StatePoint::new(vec![], t, m).unwrap();
    let rhs = HSeries::new(
        (0..=nh)
            .map(|_| {
                ZSeries::new(
                    (0..=nz)
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                )
            })
            .collect(),
    )
    .unwrap();
    let v = invert_dominant_block(&rhs, &x).unwrap();
    let back = eval_df(&x, &v).unwrap();
    let w = back.z_order();
    println!("back z-order {w}, v.dt z-order {}", v.dt().z_order());
    let diff = back.sub(&rhs.truncated_z(w).unwrap()).unwrap();
    for n in 0..=nh {
        let d = diff.coeff(n);
        let pos = d.coeffs().iter().position(|c| c.norm() > 1e-9);
        println!("order {n}: defect {:.3e} first bad z-index {:?}", d.max_abs(), pos);
    }
}

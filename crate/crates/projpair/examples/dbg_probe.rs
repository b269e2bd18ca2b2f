use projpair::numkit::{self, CMatrix, complex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..300 {
        let n = 2 + trial % 40;
        let r = trial % (n + 1);
        let g = CMatrix::from_fn(n, n, |_, _| complex(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let u = numkit::polar_unitary(&(g + numkit::identity(n).scale(0.1)), 1e-14).unwrap();
        let mut dvals: Vec<f64> = Vec::new();
        let mut d = CMatrix::zeros(n, n);
        for i in 0..r {
            let mag: f64 = match i % 4 { 0 => rng.gen_range(0.5..2.0), 1 => -rng.gen_range(0.5..2.0), 2 => 1e-9, _ => rng.gen_range(-0.1..0.1) };
            d[(i, i)] = complex(mag, 0.0);
            dvals.push(mag);
        }
        for _ in r..n { dvals.push(0.0); }
        dvals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let h = numkit::hermitian_part(&(&u * d * u.adjoint()));
        let eig = numkit::hermitian_eigen(&h);
        let val_err = eig.values.iter().zip(&dvals).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        if trial == 269 || trial == 173 || trial == 106 {
            println!("trial {trial} n={n} r={r} max eigenvalue error = {val_err:.3e}");
        }
    }
}

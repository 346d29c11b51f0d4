//! The printed upper bound for the C^0 embedding constant: its dependence
//! on the domain measure and the exponent, including the blow-up as p
//! approaches N/2 where a Gamma factor hits its pole.

use pbiharmonic::geometry::talenti_k_bound;

fn main() {
    println!("unit measure, N = 3:");
    for p in [1.6, 1.75, 2.0, 2.5, 3.0, 5.0, 10.0] {
        let k = talenti_k_bound(1.0, 3, p).unwrap();
        println!("  p = {p:5}: k <= {k:.6e}");
    }

    println!();
    println!("p = 2, N = 3, growing measure (exponent 2/N - 1/p = 1/6 > 0):");
    for meas in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let k = talenti_k_bound(meas, 3, 2.0).unwrap();
        println!("  meas = {meas:4}: k <= {k:.6e}");
    }

    println!();
    println!("approach to the pole at p = N/2 (N = 3):");
    for eps in [1e-1, 1e-2, 1e-4, 1e-6, 1e-8] {
        let k = talenti_k_bound(1.0, 3, 1.5 + eps).unwrap();
        println!("  p = 1.5 + {eps:.0e}: k <= {k:.6e}");
    }

    println!();
    println!("N = 2 has no printed bound; the certificate then requires a user k:");
    match talenti_k_bound(1.0, 2, 2.0) {
        Err(e) => println!("  {e}"),
        Ok(_) => unreachable!(),
    }
}

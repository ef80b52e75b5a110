use loewner_bt::la;
use loewner_bt::model::{generate_model, sample_transfer, ModelKind};
use loewner_bt::oracle::{variant_gramians, hankel_values};
use loewner_bt::weights::{Variant, VariantConfig};
use loewner_bt::grid::log_spaced;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let model = generate_model(&ModelKind::RlcLadder {
        sections: 200, r: 0.1, lind: 0.1, cap: 0.1, rload: 1.0, d_offset: 0.5,
    }).unwrap();
    println!("gen n=400: {:?}", t0.elapsed());

    let t = Instant::now();
    let freqs = log_spaced(-1.0, 3.0, 50);
    let set = sample_transfer(&model, &freqs, true).unwrap();
    println!("sample 50 pts at n=400: {:?}", t.elapsed());
    let _ = set;

    let t = Instant::now();
    let a = la::to_complex(&model.a);
    let x = a.dot(&a);
    println!("zgemm 400 c64: {:?}  ({:.3e})", t.elapsed(), la::frob(&x));

    let t = Instant::now();
    let ev = la::eigvals(&a).unwrap();
    println!("zgeev 400: {:?} (max re {:.3})", t.elapsed(), ev.iter().map(|l| l.re).fold(f64::MIN, f64::max));

    let t = Instant::now();
    let pair = variant_gramians(&model, &VariantConfig::new(Variant::Bt, 1e-4)).unwrap();
    println!("BT gramians n=400: {:?}", t.elapsed());
    let t = Instant::now();
    let hv = hankel_values(&pair).unwrap();
    println!("hankel n=400: {:?} (h1 {:.3e})", t.elapsed(), hv[0]);

    let t = Instant::now();
    let pair = variant_gramians(&model, &VariantConfig::new(Variant::Lqgbt, 1e-4)).unwrap();
    println!("LQG gramians (2 CARE) n=400: {:?}", t.elapsed());
    let _ = pair;

    let t = Instant::now();
    let pair = variant_gramians(&model, &VariantConfig::new(Variant::Bst, 1e-4)).unwrap();
    println!("BST gramians n=400: {:?}", t.elapsed());
    let _ = pair;
}

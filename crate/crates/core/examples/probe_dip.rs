use loewner_bt::balance::balance_reduce;
use loewner_bt::data::conjugate_close;
use loewner_bt::grid::log_spaced;
use loewner_bt::loewner::build_loewner;
use loewner_bt::model::{generate_model, sample_transfer, ModelKind};
use loewner_bt::weights::{variant_factors, Variant, VariantConfig};
use loewner_bt::balance::eval_rom_at;

fn main() {
    let eps = 1e-4;
    for seed in 0..6u64 {
        for (nm, lo, hi, zeta, dip) in [(4usize, 0.2, 200.0, 0.12, 3.0), (4, 0.2, 200.0, 0.12, 3.5), (4, 0.2, 200.0, 0.12, 16.0), (4, 0.2, 200.0, 0.2, 3.0)] {
            let kind = ModelKind::Modal {
                num_modes: nm, freq_lo: lo, freq_hi: hi, damping_ratio: zeta,
                seed, zero_dip_at: Some(dip), d_offset: 0.0,
            };
            let model = match generate_model(&kind) { Ok(m) => m, Err(_) => continue };
            // FLBT rom from 25 two-sided in-band points
            let inb = sample_transfer(&model, &log_spaced(0.0, 1.5, 25), true).unwrap();
            let inb = conjugate_close(&inb).unwrap();
            let quad = build_loewner(&inb).unwrap();
            let cfg = VariantConfig::new(Variant::Flbt { w1: 1.0, w2: 30.0 }, eps);
            let f = variant_factors(&inb, &cfg).unwrap();
            let flbt = match balance_reduce(&quad, &f, 6) { Ok(r) => r, Err(_) => continue };
            // full-band BT rom
            let full = sample_transfer(&model, &log_spaced(-1.0, 3.0, 50), true).unwrap();
            let full = conjugate_close(&full).unwrap();
            let quad2 = build_loewner(&full).unwrap();
            let f2 = variant_factors(&full, &VariantConfig::new(Variant::Bt, eps)).unwrap();
            let bt = match balance_reduce(&quad2, &f2, 6) { Ok(r) => r, Err(_) => continue };
            // eval in band
            let grid = log_spaced(0.0, 30f64.log10(), 600);
            let mut errf: f64 = 0.0; let mut errb: f64 = 0.0;
            let mut imin = 0; let mut iminf = 0; let mut iminb = 0;
            let mut vmin = f64::MAX; let mut vminf = f64::MAX; let mut vminb = f64::MAX;
            for (i, &w) in grid.iter().enumerate() {
                let h = model.eval(w).unwrap()[[0,0]];
                let hf = eval_rom_at(&flbt, w).unwrap()[[0,0]];
                let hb = eval_rom_at(&bt, w).unwrap()[[0,0]];
                errf = errf.max((h-hf).norm());
                errb = errb.max((h-hb).norm());
                if h.norm() < vmin { vmin = h.norm(); imin = i; }
                if hf.norm() < vminf { vminf = hf.norm(); iminf = i; }
                if hb.norm() < vminb { vminb = hb.norm(); iminb = i; }
            }
            println!("seed {seed} nm {nm} z {zeta} dip {dip}: dip true idx {imin} flbt {iminf} bt {iminb} | errf {errf:.3e} errb {errb:.3e} flbt_wins {}", errf < errb);
        }
    }
}

use cavsim::lossbudget::{
    assemble_budget, conductive_loss, dielectric_chip_losses, inverse_purcell, magnetic_vortex_loss, oxide_loss,
    residual_resistance_bound, ringdown_conversions, seam_loss, CavityGeometry, ExternalLoss, LossBudget,
    LossChannel, MaterialParams, PurcellInputs, EXTERNAL,
};
use cavsim::units::{per_two_pi, two_pi};
use cavsim::Error;

fn hz(rate: f64) -> f64 {
    per_two_pi(rate)
}

#[test]
fn channel_examples() {
    let g = CavityGeometry::nominal();
    let m = MaterialParams::nominal();
    assert!((hz(oxide_loss(&g, &m).unwrap()) - 0.60).abs() < 0.01);
    let p = PurcellInputs::nominal();
    let k = inverse_purcell(p.chi, p.k_q, p.t2e_q).unwrap();
    assert!((1.0 / k - 0.278).abs() < 1e-3);
    assert!((hz(seam_loss(&g, &m).unwrap()) - 1.42e-3).abs() < 0.01e-3);
    let welded = CavityGeometry { seam_admittance: 0.0, ..g.clone() };
    assert_eq!(seam_loss(&welded, &m).unwrap(), 0.0);
    assert!((hz(magnetic_vortex_loss(&g, &m).unwrap()) / 2e-4 - 1.0).abs() < 0.1);
    assert!((residual_resistance_bound(210.0, 3e9).unwrap() - 70e-9).abs() < 1e-12);
    let (bulk, surface) = dielectric_chip_losses(&g, &m);
    assert!((hz(bulk) / 2.7e-2 - 1.0).abs() < 0.10);
    assert!((hz(surface) / 2.9e-2 - 1.0).abs() < 0.01);
}

#[test]
fn table_rows_sum_to_120_ms() {
    let rows = [0.6, 0.57, 7.5e-4, 0.027, 0.029, 2e-4, 0.096];
    let b = LossBudget::from_channels(
        rows.iter().enumerate().map(|(i, r)| LossChannel::from_rate(&format!("c{i}"), "", two_pi(*r))).collect(),
    );
    assert!((b.total_lifetime_s - 0.120).abs() < 0.002);
    let ext = LossBudget::from_channels(vec![LossChannel::from_rate(EXTERNAL, "", two_pi(0.096))]);
    assert!((ext.total_lifetime_s - 1.66).abs() < 0.01);
}

#[test]
fn assembled_budget_units() {
    let b = assemble_budget(&CavityGeometry::nominal(), &MaterialParams::nominal(), &PurcellInputs::nominal()).unwrap();
    for c in &b.channels {
        assert!(c.kappa_over_2pi_hz >= 0.0);
        assert!((c.lifetime_s * two_pi(c.kappa_over_2pi_hz) - 1.0).abs() < 1e-12);
    }
    let oxide = b.channel("surface_oxides").unwrap();
    assert!((oxide.lifetime_s - 0.26).abs() < 0.01);
}

#[test]
fn ringdown_examples() {
    let w = two_pi(4.301e9);
    let r = ringdown_conversions(w, 0.110, ExternalLoss::QualityFactor(1.3e10)).unwrap();
    assert!((r.q_loaded / 3.0e9 - 1.0).abs() < 0.02);
    assert!((r.tau_ext - 0.481).abs() < 0.001);
    assert!((r.tau_int - 0.1426).abs() < 0.001);
    let none = ringdown_conversions(w, 0.110, ExternalLoss::None).unwrap();
    assert!((none.tau_int - 0.110).abs() < 1e-15);
    let bad = ringdown_conversions(w, 0.110, ExternalLoss::DecayTime(0.05));
    assert!(matches!(bad, Err(Error::Unphysical(_))));
    assert_eq!(conductive_loss(&CavityGeometry::nominal(), 0.0).unwrap(), 0.0);
}

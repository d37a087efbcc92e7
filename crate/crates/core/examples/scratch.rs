use lumpvol_core::poly::{Chart, PolyTuple};
use lumpvol_core::sphere::SphereGrid;
use lumpvol_core::vortex::{vortex_metric_in_chart, VortexConfig};
use num_complex::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

fn entries(a: f64, cfg: &VortexConfig) -> (f64, f64, f64, f64) {
    let t = a * a;
    let prox = 1.0 / ((1.0 + t) * (1.0 + t));
    let l = ((8.0 / prox.sqrt().max(2e-4)).ceil() as usize).clamp(24, 96);
    let grid = SphereGrid::new(l);
    let p = PolyTuple::new(1, 1, vec![vec![c(1.0,0.0), c(a,0.0)], vec![c(0.0,0.0), c(1.0,0.0)]]).unwrap();
    let rep = vortex_metric_in_chart(&p, Chart { fixed: 0 }, cfg, &grid).unwrap();
    (rep.g.get(0,0).re, rep.x.get(0,0).re, rep.y.get(0,0).re, rep.z.get(0,0).re)
}

fn main() {
    let s2 = 16.0 * PI;
    let cfg = VortexConfig::new(1, 1, s2).unwrap();
    let breaks = [0.0f64, 1.0, 4.0, 9.0, 25.0, 64.0, 144.0, 400.0];
    let gl5: [(f64, f64); 5] = [
        (-0.906179845938664, 0.236926885056189),
        (-0.538469310105683, 0.478628670499366),
        (0.0, 0.568888888888889),
        (0.538469310105683, 0.478628670499366),
        (0.906179845938664, 0.236926885056189),
    ];
    let mut tot = [0.0f64; 4];
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for (x, wt) in gl5 {
            let t = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
            let e = entries(t.sqrt(), &cfg);
            let f = wt * 0.5 * (hi - lo);
            tot[0] += f * e.0; tot[1] += f * e.1; tot[2] += f * e.2; tot[3] += f * e.3;
        }
        println!("through T={hi}: g={:.5} x={:.5} y={:.5} z={:.5}", tot[0], tot[1], tot[2], tot[3]);
    }
    let e = entries(20.0, &cfg);
    println!("tail coefs at T=400: g*T^2={:.4} x*T^2={:.4} y*T^2={:.4} z*T^2={:.4}",
        e.0*160000.0, e.1*160000.0, e.2*160000.0, e.3*160000.0);
    println!("classes/pi (without tail): g={:.5} x={:.5} y={:.5} z={:.5}; Baptista = {:.5}",
        tot[0], tot[1], tot[2], tot[3], 1.0-4.0*PI/s2);
}

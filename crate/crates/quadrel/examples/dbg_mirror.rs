use quadrel::criteria::analyze_profile;
use quadrel::profile::IntegrandProfile;
use quadrel::rule::{map_knots, Interval, QuadRule, PROFILE_POINTS};

fn main() {
    let seed: [i32; 23] = [0,-1,1,-10,0,-1,-2,1,2,0,-1,-12,-2,-3,0,-4,-5,0,-6,3,2,0,3];
    let r = QuadRule::gk10_21();
    let iv = Interval::new(0.0, 1.0).unwrap();
    let xs = map_knots(&r, &iv);
    let mut v = [0.0; PROFILE_POINTS];
    for (k, &s) in seed.iter().enumerate() {
        v[k] = s as f64 / 4.0;
    }
    let p1 = IntegrandProfile::from_samples(&r, xs, v, 0.5).unwrap();
    let mut vm = [0.0; PROFILE_POINTS];
    for k in 0..PROFILE_POINTS {
        vm[k] = v[PROFILE_POINTS - 1 - k];
    }
    let p2 = IntegrandProfile::from_samples(&r, xs, vm, 0.5).unwrap();
    let d1 = analyze_profile(&p1);
    let d2 = analyze_profile(&p2);
    println!("fwd extrema: {:?}", p1.extrema);
    println!("mir extrema (mapped): {:?}", p2.extrema.iter().rev().map(|&q| 22 - q).collect::<Vec<_>>());
    println!("fwd lambda {}", d1.lambda);
    for rep in &d1.reports {
        println!("  {:?} {:?} {:?}", rep.criterion, rep.locus, rep.detail);
    }
    println!("mir lambda {}", d2.lambda);
    for rep in &d2.reports {
        println!("  {:?} {:?} {:?}", rep.criterion, rep.locus, rep.detail);
    }
}

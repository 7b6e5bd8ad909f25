use num_rational::Ratio;
use proptest::prelude::*;

use warpspec::calibration::{fit_compute, fit_load, summarize, ComputeSample, LoadSample};
use warpspec::model::{self, TileTimes};
use warpspec::optimizer::{enumerate_tilings, optimize, optimize_candidates};
use warpspec::oracle::simulate_protocol;
use warpspec::simulator::{simulate, simulate_wave, wait_times, wave_time};
use warpspec::{MachineConfig, Objective, ProblemSize, Rational, SearchSpace, TilingConfig, WaveTimeMode};

fn tile_times() -> impl Strategy<Value = TileTimes<u64>> {
    (1u64..=1_000_000, 1u64..=1_000_000, 1u64..=1_000_000)
        .prop_map(|(la, lb, m)| TileTimes::new(m, la, lb).unwrap())
}

fn tile_dim() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![16u64, 32, 64, 96, 128, 256])
}

fn tiling() -> impl Strategy<Value = TilingConfig> {
    (tile_dim(), tile_dim(), tile_dim()).prop_map(|(m, n, k)| TilingConfig::new(m, n, k).unwrap())
}

fn problem() -> impl Strategy<Value = ProblemSize> {
    (1u64..=2048, 1u64..=2048, 1u64..=2048).prop_map(|(m, n, k)| ProblemSize::new(m, n, k).unwrap())
}

/// Machines whose tile costs are exact integers (throughput `1/q`), so that
/// scaling every time constant scales every cost exactly.
fn machine() -> impl Strategy<Value = MachineConfig> {
    (
        1u64..=200,
        3u64..=8,
        1i128..=8,
        1i128..=8,
        0u64..=2000,
        0u64..=2000,
        0u64..=5000,
        0u64..=5000,
        any::<bool>(),
    )
        .prop_map(|(sms, d, qc, ql, lc, ll, init, epi, prose)| MachineConfig {
            num_sms: sms,
            buffer_depth: d,
            compute_throughput: Ratio::new(1, qc),
            load_throughput: Ratio::new(1, ql),
            compute_startup_latency: lc,
            load_startup_latency: ll,
            t_init: init,
            t_epilogue: epi,
            wave_time_mode: if prose {
                WaveTimeMode::ProseWithFinalMath
            } else {
                WaveTimeMode::EquationAsWritten
            },
        })
}

fn scaled(mc: &MachineConfig, c: u64) -> MachineConfig {
    MachineConfig {
        compute_throughput: mc.compute_throughput / Ratio::from_integer(c as i128),
        load_throughput: mc.load_throughput / Ratio::from_integer(c as i128),
        compute_startup_latency: mc.compute_startup_latency * c,
        load_startup_latency: mc.load_startup_latency * c,
        t_init: mc.t_init * c,
        t_epilogue: mc.t_epilogue * c,
        ..mc.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn recurrences_match_protocol(tt in tile_times(), d in 3usize..=16, s in 1usize..=64) {
        prop_assert_eq!(simulate_wave(s, &tt, d).unwrap(), simulate_protocol(s, &tt, d));
    }

    #[test]
    fn timeline_invariants(tt in tile_times(), d in 3usize..=16, s in 1usize..=64) {
        let tl = simulate_wave(s, &tt, d).unwrap();
        prop_assert_eq!(tl.s_a[0], 0);
        for i in 0..s {
            prop_assert!(tl.s_b[i] >= tl.s_a[i] + tt.t_load_a);
            prop_assert!(tl.s_m[i] >= tl.s_b[i] + tt.t_load_b);
            if i > 0 {
                prop_assert!(tl.s_a[i] > tl.s_a[i - 1]);
                prop_assert!(tl.s_b[i] > tl.s_b[i - 1]);
                prop_assert!(tl.s_m[i] > tl.s_m[i - 1]);
            }
            if i >= d {
                prop_assert!(tl.s_a[i] >= tl.s_m[i - d] + tt.t_math);
            }
        }
    }

    #[test]
    fn steady_states(tt in tile_times(), d in 3usize..=16, s in 1usize..=64) {
        let tl = simulate_wave(s, &tt, d).unwrap();
        let wait = wait_times(&tl, &tt);
        let pair = tt.t_load_a + tt.t_load_b;
        if tt.t_math >= pair {
            for i in 1..s {
                prop_assert_eq!(tl.s_m[i] - tl.s_m[i - 1], tt.t_math);
                prop_assert_eq!(wait[i], 0);
            }
        }
        if tt.t_math <= pair {
            for i in 0..s {
                prop_assert_eq!(tl.s_m[i], (i as u64 + 1) * pair);
            }
        }
        if wait.iter().skip(1).all(|&w| w == 0) {
            prop_assert_eq!(tl.s_m[s - 1], tl.s_m[0] + (s as u64 - 1) * tt.t_math);
        }
    }

    #[test]
    fn deeper_buffer_never_delays(tt in tile_times(), d in 3usize..=15, extra in 1usize..=4, s in 1usize..=64) {
        let shallow = simulate_wave(s, &tt, d).unwrap();
        let deep = simulate_wave(s, &tt, d + extra).unwrap();
        for i in 0..s {
            prop_assert!(deep.s_a[i] <= shallow.s_a[i]);
            prop_assert!(deep.s_b[i] <= shallow.s_b[i]);
            prop_assert!(deep.s_m[i] <= shallow.s_m[i]);
        }
    }

    #[test]
    fn timeline_scales_linearly(tt in tile_times(), d in 3usize..=16, s in 1usize..=32, c in 1u64..=50, epi in 0u64..1000) {
        let base = simulate_wave(s, &tt, d).unwrap();
        let stt = TileTimes::new(tt.t_math * c, tt.t_load_a * c, tt.t_load_b * c).unwrap();
        let big = simulate_wave(s, &stt, d).unwrap();
        for i in 0..s {
            prop_assert_eq!(big.s_a[i], c * base.s_a[i]);
            prop_assert_eq!(big.s_b[i], c * base.s_b[i]);
            prop_assert_eq!(big.s_m[i], c * base.s_m[i]);
        }
        for mode in [WaveTimeMode::EquationAsWritten, WaveTimeMode::ProseWithFinalMath] {
            prop_assert_eq!(wave_time(&big, &stt, c * epi, mode), c * wave_time(&base, &tt, epi, mode));
        }
    }

    #[test]
    fn counts_are_monotone(p in problem(), t in tiling(), grow in 1u64..=64) {
        let wider = TilingConfig::new(t.t_m() + grow, t.t_n() + grow, t.t_k() + grow).unwrap();
        let mc = MachineConfig::identity();
        prop_assert!(model::output_tiles(&p, &wider) <= model::output_tiles(&p, &t));
        prop_assert!(model::waves(&p, &wider, &mc) <= model::waves(&p, &t, &mc));
        prop_assert!(model::stages(&p, &wider) <= model::stages(&p, &t));
    }

    #[test]
    fn tile_costs_are_monotone(t in tiling(), mc in machine(), bump in 1u64..=100) {
        let base = model::tile_times(&t, &mc);
        let bigger = TilingConfig::new(t.t_m() + bump, t.t_n() + bump, t.t_k() + bump).unwrap();
        let grown = model::tile_times(&bigger, &mc);
        prop_assert!(grown.t_math >= base.t_math && grown.t_load_a >= base.t_load_a && grown.t_load_b >= base.t_load_b);

        let mut slow = mc.clone();
        slow.compute_startup_latency += bump;
        slow.load_startup_latency += bump;
        slow.compute_throughput = mc.compute_throughput / Ratio::from_integer(2);
        slow.load_throughput = mc.load_throughput / Ratio::from_integer(2);
        let slowed = model::tile_times(&t, &slow);
        prop_assert!(slowed.t_math >= base.t_math && slowed.t_load_a >= base.t_load_a && slowed.t_load_b >= base.t_load_b);
    }

    #[test]
    fn divisible_counts_cover_problem(t in tiling(), a in 1u64..=16, b in 1u64..=16, c in 1u64..=16) {
        let p = ProblemSize::new(a * t.t_m(), b * t.t_n(), c * t.t_k()).unwrap();
        prop_assert_eq!(model::output_tiles(&p, &t) * t.t_m() * t.t_n(), p.m() * p.n());
        prop_assert_eq!(model::stages(&p, &t) * t.t_k(), p.k());
    }

    #[test]
    fn pipelined_never_exceeds_synchronous(p in problem(), t in tiling(), mut mc in machine()) {
        mc.wave_time_mode = WaveTimeMode::EquationAsWritten;
        let r = simulate(&p, &t, &mc).unwrap();
        prop_assert!(r.overall_time <= model::synchronous_overall_time(&p, &t, &mc));
        prop_assert_eq!(r.overall_time, r.wave_time * r.wave_count + mc.t_init);
        prop_assert_eq!(r.wave_wait, r.wait.iter().sum::<u64>());
        prop_assert_eq!(r.total_wait, r.wave_count * r.wave_wait);
    }

    #[test]
    fn optimizer_is_a_fold_over_simulate(p in problem(), mc in machine(), wait in any::<bool>()) {
        let obj = if wait { Objective::MinTotalWait } else { Objective::MinOverallTime };
        let space = SearchSpace::uniform(&[32, 64, 128]).unwrap();
        let r = optimize(&p, &mc, &space, obj).unwrap();
        let mut best: Option<(TilingConfig, u64)> = None;
        for t in enumerate_tilings(&space) {
            let sim = simulate(&p, &t, &mc).unwrap();
            let v = if wait { sim.total_wait } else { sim.overall_time };
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((t, v));
            }
        }
        prop_assert_eq!(Some((r.best, r.objective_value)), best);
    }

    #[test]
    fn argmin_survives_time_scaling(p in problem(), mc in machine(), c in 2u64..=10) {
        let space = SearchSpace::default();
        for obj in [Objective::MinOverallTime, Objective::MinTotalWait] {
            let a = optimize(&p, &mc, &space, obj).unwrap();
            let b = optimize(&p, &scaled(&mc, c), &space, obj).unwrap();
            prop_assert_eq!(a.best, b.best);
            prop_assert_eq!(a.objective_value * c, b.objective_value);
        }
    }

    #[test]
    fn dominated_candidate_never_wins(p in problem(), mc in machine(), bump in 1u64..=128) {
        let candidates = enumerate_tilings(&SearchSpace::default());
        let base = optimize_candidates(&p, &mc, &candidates, Objective::MinOverallTime).unwrap();
        let w = base.best;
        let extra = TilingConfig::new(w.t_m() + bump, w.t_n() + bump, w.t_k() + bump).unwrap();
        let extra_value = simulate(&p, &extra, &mc).unwrap().overall_time;
        prop_assume!(extra_value > base.objective_value);
        let mut more = candidates.clone();
        more.insert(0, extra);
        let r = optimize_candidates(&p, &mc, &more, Objective::MinOverallTime).unwrap();
        prop_assert_eq!(r.best, w);
    }

    #[test]
    fn fits_recover_exact_constants(
        tp in 1i128..=1000, tq in 1i128..=1000,
        lp in 0i128..=100_000, lq in 1i128..=1000,
        a in tile_dim(), b in tile_dim(), c in tile_dim(), shift in 0i128..=10_000,
    ) {
        let theta: Rational = Ratio::new(tp, tq);
        let lambda: Rational = Ratio::new(lp, lq);
        let time = |e: u64| Ratio::from_integer(e as i128) / theta + lambda;
        prop_assume!(a != b);

        let s1 = LoadSample { t_m: a, t_k: a, time: time(a * a) };
        let s2 = LoadSample { t_m: b, t_k: b, time: time(b * b) };
        let f = fit_load(&s1, &s2).unwrap();
        prop_assert_eq!(f.throughput, theta);
        prop_assert_eq!(f.startup_latency, lambda);
        prop_assert_eq!(fit_load(&s2, &s1).unwrap(), f.clone());

        let sh = Ratio::from_integer(shift);
        let f_shift = fit_load(
            &LoadSample { time: s1.time + sh, ..s1.clone() },
            &LoadSample { time: s2.time + sh, ..s2.clone() },
        ).unwrap();
        prop_assert_eq!(f_shift.throughput, theta);
        prop_assert_eq!(f_shift.startup_latency, lambda + sh);

        let c1 = ComputeSample { t_m: a, t_n: c, t_k: a, time: time(a * c * a) };
        let c2 = ComputeSample { t_m: b, t_n: c, t_k: b, time: time(b * c * b) };
        let g = fit_compute(&c1, &c2).unwrap();
        prop_assert_eq!(g.throughput, theta);
        prop_assert_eq!(g.startup_latency, lambda);
        prop_assert_eq!(fit_compute(&c2, &c1).unwrap(), g);
    }

    #[test]
    fn constant_samples_have_zero_spread(x in 1i128..=1_000_000, n in 1usize..=50) {
        let v = vec![Ratio::from_integer(x); n];
        let s = summarize(&v).unwrap();
        prop_assert_eq!(s.mean, Ratio::from_integer(x));
        prop_assert_eq!(s.stddev, Ratio::from_integer(0));
        prop_assert_eq!(s.count, n);
    }
}

mod common;

use proptest::prelude::*;
use rand::Rng;
use rvmon_core::engine::{evaluate, run_set, Level, MonitorInstance, MonitorOutput, OnlineMonitor};
use rvmon_core::lang::CompiledSpec;
use rvmon_core::stream::{Event, Time, Trace};

/// Random spec with a Bool verdict appended, so it can serve as a monitor.
fn random_monitor(seed: u64, id: &str) -> (MonitorInstance, Trace) {
    let mut rng = common::rng(seed);
    let mut src = common::random_spec(&mut rng);
    src.push_str("def attack := prev(i0) == i0\nout attack\n");
    let spec = CompiledSpec::from_source(&src).unwrap();
    let trace = common::random_trace(&mut rng, &spec, 50);
    (MonitorInstance::with_defaults(id, Level::Data, spec).unwrap(), trace)
}

fn truncate_output(out: &MonitorOutput, cut: Time) -> Vec<Vec<Event>> {
    out.outputs.iter().map(|s| s.truncated(cut).events().to_vec()).collect()
}

fn merged_events(m: &MonitorInstance, trace: &Trace) -> Vec<(String, Event)> {
    let mut all: Vec<(Time, usize, String, Event)> = Vec::new();
    let channels = m.binding.resolve(&m.spec.typed).unwrap();
    let mut distinct = channels.clone();
    distinct.sort();
    distinct.dedup();
    for (ci, ch) in distinct.iter().enumerate() {
        for e in trace.get(ch).map(|s| s.events()).unwrap_or_default() {
            all.push((e.t, ci, ch.clone(), *e));
        }
    }
    all.sort_by_key(|(t, ci, _, _)| (*t, *ci));
    all.into_iter().map(|(_, _, ch, e)| (ch, e)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn prefix_stability(seed in any::<u64>(), cut in 0u64..5200) {
        let (m, trace) = random_monitor(seed, "m");
        let cut = Time::from_millis(cut);
        let full = evaluate(&m, &trace);
        let short = evaluate(&m, &trace.truncated(cut));
        match (full, short) {
            (Ok(full), Ok(short)) => {
                prop_assert_eq!(truncate_output(&full, cut), truncate_output(&short, cut));
                prop_assert_eq!(short.outputs.iter().map(|s| s.len()).collect::<Vec<_>>(),
                    truncate_output(&full, cut).iter().map(Vec::len).collect::<Vec<_>>());
            }
            (Err(_), _) => {}
            (Ok(_), Err(e)) => prop_assert!(false, "prefix failed where full run succeeded: {e}"),
        }
    }

    #[test]
    fn deterministic_and_trace_untouched(seed in any::<u64>()) {
        let (m, trace) = random_monitor(seed, "m");
        let before = trace.fingerprint();
        let a = evaluate(&m, &trace);
        let b = evaluate(&m, &trace);
        prop_assert_eq!(trace.fingerprint(), before);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!(a.identical(&b)),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "runs disagree"),
        }
    }

    #[test]
    fn streaming_split_matches_offline(seed in any::<u64>(), split_seed in any::<u64>()) {
        let (m, trace) = random_monitor(seed, "m");
        let Ok(offline) = evaluate(&m, &trace) else { return Ok(()) };
        let events = merged_events(&m, &trace);
        let mut rng = common::rng(split_seed);
        let mut online = OnlineMonitor::new(&m).unwrap();
        let mut emitted = 0;
        let mut rest = &events[..];
        while !rest.is_empty() {
            let n = rng.random_range(1..=rest.len().min(7));
            let (batch, tail) = rest.split_at(n);
            emitted += online.push_batch(batch.iter().map(|(c, e)| (c.as_str(), *e))).unwrap().len();
            let so_far = online.outputs().iter().map(|s| s.len()).sum::<usize>();
            prop_assert_eq!(emitted, so_far);
            rest = tail;
        }
        let streamed = online.finish().unwrap();
        prop_assert!(streamed.identical(&offline));
        prop_assert_eq!(streamed.period, offline.period);
    }

    #[test]
    fn monitors_are_independent(seeds in proptest::collection::vec(any::<u64>(), 2..5), drop in any::<prop::sample::Index>()) {
        // Every monitor reads channels i0..i2 of one shared trace.
        let mut trace = Trace::new();
        let mut monitors = Vec::new();
        for (k, seed) in seeds.iter().enumerate() {
            let (m, t) = random_monitor(*seed, &format!("m{k}"));
            for s in t.streams() {
                let name = format!("{}_{k}", s.channel());
                trace.insert(s.renamed(name));
            }
            let overrides: Vec<(String, String)> = m.spec.typed.inputs.iter()
                .map(|i| (i.name.clone(), format!("{}_{k}", i.name))).collect();
            let binding = overrides.iter().fold(m.binding.clone(), |b, (i, c)| b.bind(i, c));
            monitors.push(MonitorInstance::new(m.id, m.level, m.spec, binding, m.verdict_channel).unwrap());
        }
        let before = trace.fingerprint();
        let all = run_set(&monitors, &trace);
        let dropped = drop.index(monitors.len());
        let mut subset = monitors.clone();
        subset.remove(dropped);
        let some = run_set(&subset, &trace);
        prop_assert_eq!(trace.fingerprint(), before);
        for m in &subset {
            let solo = evaluate(m, &trace);
            match (all.output(&m.id), some.output(&m.id), solo) {
                (Some(a), Some(b), Ok(c)) => {
                    prop_assert!(a.identical(b));
                    prop_assert!(a.identical(&c));
                }
                (None, None, Err(_)) => {}
                _ => prop_assert!(false, "monitor {} changed with its neighbours", m.id),
            }
        }
        let full_report = all.report();
        let sub_report = some.report();
        for s in &sub_report.monitors {
            prop_assert_eq!(Some(s), full_report.monitor(&s.id));
        }
    }
}

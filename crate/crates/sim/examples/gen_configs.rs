// one-off: emit the default scenario config and an example channel dump
use comp_noma::channel::{self, ScenarioConfig};
use comp_noma_sim::formats::{self, ChannelDump};
use std::path::Path;

fn main() {
    let cfg = ScenarioConfig::default();
    formats::write_scenario(Path::new("configs/default.json"), &cfg).unwrap();
    let mut rng = channel::trial_rng(cfg.seed, 0);
    let pos = channel::sample_positions(&cfg, &mut rng).unwrap();
    let ch = channel::gen_channel_set(&cfg, &pos, &mut rng);
    let dump = ChannelDump::new(
        &ch.h10, &ch.h20, &ch.h11, &ch.h22,
        cfg.noise_power, cfg.target_rates, cfg.p_max / cfg.group_count as f64,
    );
    formats::write_dump(Path::new("configs/example_dump.json"), &dump).unwrap();
    println!("wrote configs/default.json and configs/example_dump.json");
}

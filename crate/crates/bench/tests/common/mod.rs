#![allow(dead_code)]

use ergoplan::agents::{AgentSpec, SensorModel};
use ergoplan::optimizer::OptimizerConfig;
use ergoplan_bench::config::{ExperimentConfig, MapSource, Strategy, TeamEntry};

/// A benchmark small enough for debug-speed tests.
pub fn tiny_config(heterogeneous: bool) -> ExperimentConfig {
    let mut team = vec![TeamEntry {
        count: 2,
        agent: AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1).with_horizon(0.1, 30),
    }];
    if heterogeneous {
        team.push(TeamEntry {
            count: 1,
            agent: AgentSpec::diff_drive(1, SensorModel::high_fidelity(1.0), 0.1, 10.0, 0.0).with_horizon(0.1, 30),
        });
    }
    let mut config = ExperimentConfig::homogeneous();
    config.maps = MapSource::Synthetic {
        count: 2,
        seed: 5,
        resolution: 60,
    };
    config.trials_per_map = 2;
    config.team = team;
    config.strategies = Strategy::ALL.to_vec();
    config.optimizer = OptimizerConfig {
        max_iters: 25,
        restarts: 2,
        ..OptimizerConfig::default()
    };
    config.max_index = 6;
    config.master_seed = 99;
    config
}

/// Minimal well-formedness check: balanced tags, quoted attributes, a
/// single root element and no stray `<` or `&`.
pub fn check_xml(text: &str) -> Result<(), String> {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0;
    let mut rest = text;
    if let Some(after) = rest.strip_prefix("<?xml") {
        let end = after.find("?>").ok_or("unterminated declaration")?;
        rest = &after[end + 2..];
    }
    while let Some(open) = rest.find('<') {
        let between = &rest[..open];
        if between.contains('&') && !between.contains("&amp;") {
            return Err("bare ampersand in text".into());
        }
        if !between.trim().is_empty() && stack.is_empty() {
            return Err("text outside the root element".into());
        }
        let close = rest[open..].find('>').ok_or("unterminated tag")? + open;
        let tag = &rest[open + 1..close];
        if tag.contains('<') {
            return Err(format!("`<` inside tag `{tag}`"));
        }
        if let Some(name) = tag.strip_prefix('/') {
            match stack.pop() {
                Some(top) if top == name.trim() => {}
                other => return Err(format!("closing `{name}` does not match {other:?}")),
            }
        } else {
            let self_closing = tag.ends_with('/');
            let body = tag.trim_end_matches('/');
            let name: String = body.chars().take_while(|c| !c.is_whitespace()).collect();
            if name.is_empty() {
                return Err("empty tag name".into());
            }
            check_attributes(&body[name.len()..])?;
            if stack.is_empty() {
                roots += 1;
            }
            if !self_closing {
                stack.push(name);
            }
        }
        rest = &rest[close + 1..];
    }
    if !rest.trim().is_empty() {
        return Err("trailing text".into());
    }
    if !stack.is_empty() {
        return Err(format!("unclosed elements {stack:?}"));
    }
    if roots != 1 {
        return Err(format!("{roots} root elements"));
    }
    Ok(())
}

fn check_attributes(mut s: &str) -> Result<(), String> {
    loop {
        s = s.trim_start();
        if s.is_empty() {
            return Ok(());
        }
        let eq = s.find('=').ok_or_else(|| format!("attribute without value in `{s}`"))?;
        let name = &s[..eq];
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(format!("bad attribute name `{name}`"));
        }
        let value = &s[eq + 1..];
        let quote = value.chars().next().ok_or("missing attribute value")?;
        if quote != '"' && quote != '\'' {
            return Err(format!("unquoted value for `{name}`"));
        }
        let end = value[1..].find(quote).ok_or("unterminated attribute value")?;
        s = &value[end + 2..];
    }
}

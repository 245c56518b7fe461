/// Minimal robots.txt rules: the group addressed to our agent (or `*`),
/// longest matching `Allow`/`Disallow` prefix wins, `Allow` wins ties.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Robots {
    rules: Vec<(bool, String)>,
}

impl Robots {
    pub fn allow_all() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, agent: &str) -> Self {
        let agent = agent.to_ascii_lowercase();
        let mut specific: Option<Vec<(bool, String)>> = None;
        let mut wildcard: Option<Vec<(bool, String)>> = None;

        let mut group_agents: Vec<String> = Vec::new();
        let mut group_rules: Vec<(bool, String)> = Vec::new();
        let mut in_rules = false;
        let mut close = |agents: &mut Vec<String>, rules: &mut Vec<(bool, String)>| {
            for a in agents.iter() {
                if a == "*" {
                    wildcard.get_or_insert_with(Vec::new).extend(rules.iter().cloned());
                } else if agent.contains(a.as_str()) {
                    specific.get_or_insert_with(Vec::new).extend(rules.iter().cloned());
                }
            }
            agents.clear();
            rules.clear();
        };

        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once(':') else {
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "user-agent" => {
                    if in_rules {
                        close(&mut group_agents, &mut group_rules);
                        in_rules = false;
                    }
                    group_agents.push(value.to_ascii_lowercase());
                }
                "disallow" | "allow" => {
                    in_rules = true;
                    // empty Disallow means allow everything
                    if !value.is_empty() {
                        group_rules.push((key == "allow", value.to_owned()));
                    }
                }
                _ => {}
            }
        }
        close(&mut group_agents, &mut group_rules);
        Self {
            rules: specific.or(wildcard).unwrap_or_default(),
        }
    }

    pub fn allows(&self, path: &str) -> bool {
        let mut best: Option<(usize, bool)> = None;
        for (allow, prefix) in &self.rules {
            if path.starts_with(prefix.as_str()) {
                let len = prefix.len();
                best = match best {
                    Some((l, a)) if l > len || (l == len && a) => Some((l, a)),
                    _ => Some((len, *allow)),
                };
            }
        }
        best.is_none_or(|(_, allow)| allow)
    }
}

#[cfg(test)]
mod tests {
    use super::Robots;

    const TXT: &str = "\
User-agent: *
Disallow: /private/

User-agent: synseek
Disallow: /tmp/
Allow: /tmp/public
";

    #[test]
    fn specific_group_beats_wildcard() {
        let r = Robots::parse(TXT, "synseek/0.1");
        assert!(!r.allows("/tmp/x"));
        assert!(r.allows("/tmp/public/a.html"));
        assert!(r.allows("/private/a.html"));

        let other = Robots::parse(TXT, "otherbot");
        assert!(!other.allows("/private/a.html"));
        assert!(other.allows("/tmp/x"));
    }

    #[test]
    fn empty_disallow_allows_everything() {
        let r = Robots::parse("User-agent: *\nDisallow:\n", "synseek");
        assert!(r.allows("/anything"));
        assert!(Robots::allow_all().allows("/"));
    }
}

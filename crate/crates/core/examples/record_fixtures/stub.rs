//! Rule-based stand-in for a chat model. It reads the worker name and the
//! JSON payload from each prompt and answers in the requested format, so a
//! full run can be recorded without network access. It deliberately makes a
//! few mistakes (a bad column, an ungrounded number, an invalid chart) so
//! the recorded runs exercise every repair path.

use factflow::agent::{LlmTransport, TransportError};
use regex::Regex;
use serde_json::{json, Value as Json};

pub struct StubModel;

impl LlmTransport for StubModel {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let worker = prompt
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("Worker: "))
            .ok_or_else(|| TransportError::Script("prompt has no worker line".into()))?;
        let payload = input_payload(prompt).ok_or_else(|| TransportError::Script("prompt has no input block".into()))?;
        let out = match worker {
            "fact_composer" => composer(&payload),
            "extractor_advisor" => advisor(&payload),
            "extractor_generator" => generator(&payload),
            "visualizer" => visualizer(&payload),
            "writer" => writer(&payload),
            "organizer" => organizer(&payload),
            "placer" => placer(&payload),
            other => return Err(TransportError::Script(format!("stub has no rule for {other}"))),
        };
        Ok(format!("```json\n{}\n```\n", serde_json::to_string_pretty(&out).unwrap()))
    }
}

fn input_payload(prompt: &str) -> Option<Json> {
    let start = prompt.find("\n## Input\n```json\n")? + "\n## Input\n```json\n".len();
    let end = prompt[start..].find("\n```")? + start;
    serde_json::from_str(&prompt[start..end]).ok()
}

struct Column {
    name: String,
    class: String,
    unique: usize,
    year_like: bool,
}

struct Table {
    name: String,
    columns: Vec<Column>,
}

impl Table {
    fn parse(text: &str) -> Table {
        let name = Regex::new(r#"CREATE TABLE "((?:[^"]|"")*)""#)
            .unwrap()
            .captures(text)
            .map(|c| c[1].replace("\"\"", "\""))
            .unwrap_or_else(|| "data".into());
        let line = Regex::new(r"^(.+) \((nominal|ordinal|discrete|continuous)\): (.*)$").unwrap();
        let unique = Regex::new(r"unique=(\d+)").unwrap();
        let min = Regex::new(r"min=(-?[\d.]+)").unwrap();
        let max = Regex::new(r"max=(-?[\d.]+)").unwrap();
        let columns = text
            .lines()
            .filter_map(|l| line.captures(l))
            .map(|c| {
                let stats = &c[3];
                let num = |re: &Regex| re.captures(stats).and_then(|m| m[1].parse::<f64>().ok());
                let year_like = &c[2] == "discrete"
                    && matches!((num(&min), num(&max)), (Some(lo), Some(hi)) if lo >= 1900.0 && hi <= 2100.0);
                Column {
                    name: c[1].to_string(),
                    class: c[2].to_string(),
                    unique: unique.captures(stats).and_then(|m| m[1].parse().ok()).unwrap_or(0),
                    year_like,
                }
            })
            .collect();
        Table { name, columns }
    }

    fn time(&self) -> Option<&str> {
        self.columns.iter().find(|c| c.year_like).map(|c| c.name.as_str())
    }

    fn measures(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| (c.class == "continuous" || c.class == "discrete") && !c.year_like)
            .map(|c| c.name.as_str())
            .collect()
    }

    fn categories(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| (c.class == "nominal" || c.class == "ordinal") && c.unique <= 15)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// The identifying text column (most distinct values).
    fn entity(&self) -> Option<&str> {
        self.columns
            .iter()
            .filter(|c| c.class == "nominal")
            .max_by_key(|c| c.unique)
            .map(|c| c.name.as_str())
    }

    fn column_named(&self, word: &str) -> Option<&str> {
        self.columns
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(word))
            .map(|c| c.name.as_str())
    }
}

fn q(ident: &str) -> String {
    format!("\"{}\"", ident.replace('"', "\"\""))
}

/// One idea the stub knows how to answer end to end.
struct Plan {
    fact_type: &'static str,
    content: String,
    significance: f64,
    sql: String,
    /// SQL returned on the first attempt instead of `sql`.
    first_try: Option<String>,
}

fn plans(t: &Table, request: Option<&str>) -> Vec<Plan> {
    let mut out = Vec::new();
    let table = q(&t.name);
    let measures = t.measures();
    let cats = t.categories();
    let (Some(&m), Some(&c1)) = (measures.first(), cats.first()) else {
        return out;
    };
    let c2 = cats.get(1).copied().unwrap_or(c1);
    let (qm, qc1, qc2) = (q(m), q(c1), q(c2));

    if let Some(r) = request {
        if let Some(p) = request_plan(t, r) {
            out.push(p);
        }
    }
    if let Some(time) = t.time() {
        let qt = q(time);
        out.push(Plan {
            fact_type: "trend",
            content: format!("Total {m} per {time}"),
            significance: 0.92,
            sql: format!("SELECT {qt}, SUM({qm}) AS {} FROM {table} GROUP BY {qt} ORDER BY {qt}", q(&format!("Total {m}"))),
            first_try: None,
        });
    }
    out.push(Plan {
        fact_type: "rank",
        content: format!("{c1} ranked by total {m}"),
        significance: 0.88,
        sql: format!(
            "SELECT {qc1}, SUM({qm}) AS {a} FROM {table} GROUP BY {qc1} ORDER BY {a} DESC",
            a = q(&format!("Total {m}"))
        ),
        first_try: None,
    });
    out.push(Plan {
        fact_type: "proportion",
        content: format!("Share of total {m} by {c2}"),
        significance: 0.8,
        sql: format!(
            "SELECT {qc2}, SUM({qm}) AS {a} FROM {table} GROUP BY {qc2} ORDER BY {a} DESC",
            a = q(&format!("Total {m}"))
        ),
        first_try: None,
    });
    if let Some(time) = t.time() {
        let qt = q(time);
        out.push(Plan {
            fact_type: "trend",
            content: format!("Total {m} per {time} for each {c2}"),
            significance: 0.74,
            sql: format!(
                "SELECT {qt}, {qc2}, SUM({qm}) AS {} FROM {table} GROUP BY {qt}, {qc2} ORDER BY {qt}",
                q(&format!("Total {m}"))
            ),
            first_try: None,
        });
    }
    out.push(Plan {
        fact_type: "extreme",
        content: format!("Top 3 {c1} by average {m}"),
        significance: 0.7,
        sql: format!(
            "SELECT {qc1}, AVG({qm}) AS {a} FROM {table} GROUP BY {qc1} ORDER BY {a} DESC LIMIT 3",
            a = q(&format!("Average {m}"))
        ),
        first_try: None,
    });
    if measures.len() >= 3 {
        let (x, y) = (measures[1], measures[2]);
        out.push(Plan {
            fact_type: "association",
            content: format!("{y} against {x} across all records"),
            significance: 0.66,
            sql: format!("SELECT {}, {} FROM {table}", q(x), q(y)),
            first_try: None,
        });
    }
    out.push(Plan {
        fact_type: "categorization",
        content: format!("Number of records per {c2}"),
        significance: 0.6,
        sql: format!("SELECT {qc2}, COUNT(*) AS \"Records\" FROM {table} GROUP BY {qc2} ORDER BY \"Records\" DESC"),
        first_try: None,
    });
    out.push(Plan {
        fact_type: "aggregation",
        content: format!("Average {m} per {c2}"),
        significance: 0.55,
        sql: format!("SELECT {qc2}, AVG({qm}) AS {} FROM {table} GROUP BY {qc2}", q(&format!("Average {m}"))),
        // a plausible slip: a pluralized column name
        first_try: Some(format!(
            "SELECT {qc2}, AVG({}) AS {} FROM {table} GROUP BY {qc2}",
            q(&format!("{m}s")),
            q(&format!("Average {m}"))
        )),
    });
    out
}

/// Request-driven ideas: "top N <things> with the highest <measure>" and
/// "proportion of <things> by <column> from <value> <column>".
fn request_plan(t: &Table, r: &str) -> Option<Plan> {
    let table = q(&t.name);
    let top = Regex::new(r"(?i)top (\d+) (\w+?)s? with the highest (\w+)").unwrap();
    if let Some(c) = top.captures(r) {
        let n: usize = c[1].parse().ok()?;
        let mut value = c[2].to_lowercase();
        value[..1].make_ascii_uppercase();
        let class_col = t
            .columns
            .iter()
            .find(|c| Regex::new(r"(?i)type|genre|category").unwrap().is_match(&c.name))?
            .name
            .clone();
        let entity = t.entity()?;
        let m = t
            .measures()
            .into_iter()
            .find(|m| m.to_lowercase().contains("worldwide"))
            .or_else(|| t.measures().first().copied())?;
        let since = Regex::new(r"(?i)this century")
            .unwrap()
            .is_match(r)
            .then_some(2000)
            .or_else(|| Regex::new(r"since (\d{4})").unwrap().captures(r).and_then(|c| c[1].parse().ok()));
        let time = t.time()?;
        let year_pred = since.map(|y| format!(" AND {} >= {y}", q(time))).unwrap_or_default();
        return Some(Plan {
            fact_type: "rank",
            content: format!(
                "Top {n} {value} titles by {m}{}",
                since.map(|y| format!(" since {y}")).unwrap_or_default()
            ),
            significance: 0.97,
            sql: format!(
                "SELECT {}, {} FROM {table} WHERE {} = '{value}'{year_pred} ORDER BY {} DESC LIMIT {n}",
                q(entity),
                q(m),
                q(&class_col),
                q(m)
            ),
            first_try: None,
        });
    }
    let prop = Regex::new(r"(?i)proportion of (\w+) by (\w+) from (\w+) (\w+)").unwrap();
    if let Some(c) = prop.captures(r) {
        let by = t.column_named(&c[2])?;
        let filter = t.column_named(&c[4])?;
        let label = {
            let mut s = c[1].to_lowercase();
            s[..1].make_ascii_uppercase();
            s
        };
        return Some(Plan {
            fact_type: "proportion",
            content: r.trim().to_string(),
            significance: 0.9,
            sql: format!(
                "SELECT {b}, COUNT(*) AS {l} FROM {table} WHERE {f} = '{v}' GROUP BY {b} ORDER BY {l} DESC",
                b = q(by),
                l = q(&label),
                f = q(filter),
                v = &c[3]
            ),
            first_try: None,
        });
    }
    None
}

fn find_plan<'a>(plans: &'a [Plan], content: &str) -> Option<&'a Plan> {
    plans.iter().find(|p| p.content.eq_ignore_ascii_case(content.trim()))
}

fn composer(p: &Json) -> Json {
    let t = Table::parse(p["dataset"].as_str().unwrap_or_default());
    let request = p["request"].as_str();
    if p["mode"] == "single" {
        let r = request.unwrap_or_default();
        let plan = request_plan(&t, r);
        let (ft, content) = plan.map(|p| (p.fact_type, p.content)).unwrap_or(("value", r.to_string()));
        return json!({"facts": [{"fact_type": ft, "content": content, "significance": 0.9}]});
    }
    let sample = p["sample"].as_u64().unwrap_or(1);
    let all = plans(&t, request);
    let n = all.len();
    let mut facts = Vec::new();
    for (i, plan) in all.iter().enumerate() {
        // sample 2 skips the last idea, sample 3 skips the fifth
        if (sample == 2 && i + 1 == n) || (sample == 3 && i == 4) {
            continue;
        }
        let content = if sample == 2 && plan.fact_type == "rank" && plan.content.contains(" ranked by ") {
            // same words, different order: merges under one signature
            let (c, m) = plan.content.split_once(" ranked by ").unwrap();
            format!("{} ranked by {c}", capitalize(m))
        } else {
            plan.content.clone()
        };
        let jitter = 0.02 * (sample as f64 - 2.0);
        facts.push(json!({
            "fact_type": plan.fact_type,
            "content": content,
            "significance": ((plan.significance + jitter) * 100.0).round() / 100.0,
        }));
    }
    if sample == 3 {
        if let Some(m) = t.measures().first() {
            facts.push(json!({"fact_type": "outlier", "content": format!("Unusually large {m} values"), "significance": 0.5}));
        }
    }
    json!({ "facts": facts })
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn advisor(p: &Json) -> Json {
    let t = Table::parse(p["dataset"].as_str().unwrap_or_default());
    let content = p["fact"]["content"].as_str().unwrap_or_default();
    let all = plans(&t, p["request"].as_str());
    let mut recs = vec![format!("Query the single table {} and quote column names exactly as declared.", q(&t.name))];
    if let Some(plan) = find_plan(&all, content) {
        let sql = plan.sql.to_uppercase();
        if sql.contains("GROUP BY") {
            recs.push("Group by the category or time column and aggregate the measure.".into());
        }
        if sql.contains("ORDER BY") {
            recs.push("Order the result so the chart reads naturally.".into());
        }
        if sql.contains("LIMIT") {
            recs.push("Limit the rows to the number the fact asks for.".into());
        }
        if sql.contains("WHERE") {
            recs.push("Filter with literal values taken from the request.".into());
        }
    }
    json!({ "recommendations": recs })
}

fn generator(p: &Json) -> Json {
    let t = Table::parse(p["dataset"].as_str().unwrap_or_default());
    let content = p["fact"]["content"].as_str().unwrap_or_default();
    let attempt = p["attempt"].as_u64().unwrap_or(1);
    let all = plans(&t, p["request"].as_str());
    let sql = match find_plan(&all, content) {
        Some(plan) if attempt == 1 && plan.first_try.is_some() => plan.first_try.clone().unwrap(),
        Some(plan) => plan.sql.clone(),
        None => {
            let c = t.categories().first().map(|c| q(c)).unwrap_or_else(|| "1".into());
            format!("SELECT {c}, COUNT(*) AS \"Records\" FROM {} GROUP BY {c}", q(&t.name))
        }
    };
    json!({ "sql": sql })
}

fn visualizer(p: &Json) -> Json {
    let content = p["fact"]["content"].as_str().unwrap_or_default();
    let cols: Vec<(String, String)> = p["columns"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|c| (c["name"].as_str().unwrap_or_default().to_string(), c["type"].as_str().unwrap_or_default().to_string()))
                .collect()
        })
        .unwrap_or_default();
    let repairing = p["feedback"].as_array().is_some_and(|f| !f.is_empty());
    let numeric = |t: &str| t == "INTEGER" || t == "REAL";
    let x = cols[0].clone();
    let y = cols.iter().skip(1).rev().find(|c| numeric(&c.1)).cloned().unwrap_or_else(|| cols[cols.len() - 1].clone());
    let color = (cols.len() == 3).then(|| cols[1].0.clone()).filter(|c| *c != y.0);
    let yearish = x.0.to_lowercase().contains("year");
    let lower = content.to_lowercase();
    let (chart_type, color, scheme) = if lower.starts_with("number of records") && !repairing {
        // invalid on purpose: a pie with a second color channel
        ("pie", Some(y.0.clone()), "categorical")
    } else if yearish {
        ("line", color, "categorical")
    } else if numeric(&x.1) && numeric(&y.1) {
        ("scatter", None, "categorical")
    } else if lower.starts_with("share") || lower.contains("proportion") {
        ("pie", None, "categorical")
    } else if lower.contains("ranked") {
        ("bar", None, "sequential")
    } else {
        ("bar", None, "categorical")
    };
    let mut out = json!({
        "chart_type": chart_type,
        "x_field": x.0,
        "y_field": y.0,
        "axis_labels": {"x": x.0, "y": y.0},
        "title": content,
        "color_scheme": scheme,
    });
    if let Some(c) = color {
        out["color_field"] = json!(c);
    }
    out
}

/// Cell as the writer would quote it: integers verbatim, reals to one
/// decimal place.
fn cell(v: &Json) -> String {
    match v {
        Json::Number(n) if n.is_f64() => format!("{:.1}", n.as_f64().unwrap_or_default()),
        Json::Number(n) => n.to_string(),
        Json::String(s) => s.clone(),
        _ => String::new(),
    }
}

fn writer(p: &Json) -> Json {
    let content = p["fact"]["content"].as_str().unwrap_or_default();
    let chart = &p["chart"];
    let h = &p["highlights"];
    let (x, y) = (chart["x_field"].as_str().unwrap_or_default(), chart["y_field"].as_str().unwrap_or_default());
    let y_label = chart["axis_labels"]["y"].as_str().unwrap_or(y);
    let rows = h["rows"].as_u64().unwrap_or(0);
    let (first, last, min, max) = (&h["first"], &h["last"], &h["min"], &h["max"]);
    if rows == 0 || max.is_null() {
        return json!({"statement": content});
    }
    let repairing = p["feedback"].as_array().is_some_and(|f| !f.is_empty());
    let chart_type = chart["chart_type"].as_str().unwrap_or_default();
    let color = chart["color_field"].as_str();
    let mut qas = Vec::new();
    let statement = if rows == 1 {
        format!("{x} {} records {} {y_label}.", cell(&max[x]), cell(&max[y]))
    } else if chart_type == "scatter" {
        format!(
            "Across {rows} records, {y_label} ranges from {} to {}, with the highest value at {x} {}.",
            cell(&min[y]),
            cell(&max[y]),
            cell(&max[x])
        )
    } else if cell(&min[y]) == cell(&max[y]) {
        format!("All {rows} groups of {x} share the same {y_label}, {}.", cell(&max[y]))
    } else if chart_type == "line" {
        match color {
            Some(c) => {
                qas.push(json!({
                    "question": format!("Why does {} lead in {}?", cell(&max[c]), cell(&max[x])),
                    "answer": "It may have matched demand best that year; the table shows the outcome, not the cause.",
                }));
                format!(
                    "The highest {y_label} is {}, reached by {} in {}; the lowest is {}, for {} in {}.",
                    cell(&max[y]),
                    cell(&max[c]),
                    cell(&max[x]),
                    cell(&min[y]),
                    cell(&min[c]),
                    cell(&min[x])
                )
            }
            None => {
                qas.push(json!({
                    "question": format!("Why did {y_label} dip in {}?", cell(&min[x])),
                    "answer": "A broad downturn in that period is a likely driver, but the data cannot confirm it.",
                }));
                format!(
                    "{y_label} moved from {} in {} to {} in {}, peaking at {} in {} and bottoming at {} in {}.",
                    cell(&first[y]),
                    cell(&first[x]),
                    cell(&last[y]),
                    cell(&last[x]),
                    cell(&max[y]),
                    cell(&max[x]),
                    cell(&min[y]),
                    cell(&min[x])
                )
            }
        }
    } else {
        qas.push(json!({
            "question": format!("Why is {} ahead on {y_label}?", cell(&max[x])),
            "answer": "Scale, pricing and reach differ between groups; the table shows the ranking but not its causes.",
        }));
        let mut s = format!(
            "{} leads with {}, while {} is lowest at {} among {rows} groups.",
            cell(&max[x]),
            cell(&max[y]),
            cell(&min[x]),
            cell(&min[y])
        );
        if content.contains(" ranked by ") && !repairing {
            // invented figure, caught by the grounding check
            s.push_str(" The leader is 12.5% ahead of the runner-up.");
        }
        s
    };
    json!({"statement": statement, "causal_qas": qas})
}

fn family(fact_type: &str) -> usize {
    match fact_type {
        "trend" => 0,
        "rank" | "extreme" => 1,
        _ => 2,
    }
}

const TOPICS: [&str; 3] = ["Trends over time", "Leaders and rankings", "Composition and spread"];

fn organizer(p: &Json) -> Json {
    let facts = p["facts"].as_array().cloned().unwrap_or_default();
    let mut groups: Vec<(String, Vec<String>)> = TOPICS.iter().map(|t| (t.to_string(), vec![])).collect();
    for f in &facts {
        groups[family(f["fact_type"].as_str().unwrap_or_default())]
            .1
            .push(f["id"].as_str().unwrap_or_default().to_string());
    }
    groups.retain(|g| !g.1.is_empty());
    if groups.len() == 1 && groups[0].1.len() >= 2 {
        let (topic, ids) = groups.remove(0);
        let half = ids.len().div_ceil(2);
        groups = vec![(topic.clone(), ids[..half].to_vec()), (format!("{topic}, continued"), ids[half..].to_vec())];
    }
    let name = p["dataset_name"].as_str().unwrap_or("Dataset");
    let title = match p["request"].as_str() {
        Some(_) => format!("{name}: the requested view"),
        None => format!("{name} at a glance"),
    };
    json!({
        "title": title,
        "sections": groups.into_iter().map(|(t, ids)| json!({"topic": t, "fact_ids": ids})).collect::<Vec<_>>(),
    })
}

fn placer(p: &Json) -> Json {
    let want = TOPICS[family(p["fact"]["fact_type"].as_str().unwrap_or_default())];
    let sections = p["sections"].as_array().cloned().unwrap_or_default();
    let id = sections
        .iter()
        .find(|s| s["topic"].as_str().is_some_and(|t| t.starts_with(want)))
        .or(sections.last())
        .and_then(|s| s["id"].as_str())
        .unwrap_or_default();
    json!({ "section_id": id })
}

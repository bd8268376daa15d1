use serde_json::Value;
use sumrank_web::{code_parameters_json, explore_group_json, list_size_table_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("valid JSON")
}

#[test]
fn group_explorer_reports_orders() {
    let g1 = parse(explore_group_json(3, 2, "g1", 0).unwrap());
    assert_eq!(g1["group"]["order"], 8);
    assert_eq!(g1["properties"]["order"], 8);
    let g2 = parse(explore_group_json(3, 2, "g2", 0).unwrap());
    assert_eq!(g2["group"]["order"], 64);
    assert!(g2["group"]["non_cyclic_witness"].is_number());
    assert!(explore_group_json(3, 2, "g3", 0).is_err());
    assert!(explore_group_json(7, 5, "g1", 0).is_err());
}

#[test]
fn code_explorer_matches_known_parameters() {
    let c3 = parse(code_parameters_json("c3bar", 3, 2, 2).unwrap());
    assert_eq!(c3["shape"], "(2x2|2x4)");
    assert_eq!(c3["d"], 3);
    assert_eq!(c3["msrd"], true);
    assert_eq!(c3["cosets"]["covering_radius"], 2);
    assert_eq!(c3["cosets"]["max_list_by_radius"][2], 5);
    let c1 = parse(code_parameters_json("c1bar", 3, 2, 2).unwrap());
    assert_eq!(c1["d"], 2);
    assert!(c1["cosets"]["skipped"].is_string());
    assert!(code_parameters_json("c4bar", 3, 2, 2).is_err());
}

#[test]
fn table_has_all_families() {
    let t = parse(list_size_table_json(3, 2, 2).unwrap());
    let rows = t["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2]["brute_force_l"], 5);
    assert!(t["markdown"].as_str().unwrap().contains("1+1*3^14"));
}

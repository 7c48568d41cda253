use cmreduce_web::{class_group, joint_reduction, supersingular};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn class_group_of_minus_23() {
    assert_eq!(parse(class_group(-23))["h"], 3);
    assert!(class_group(5).is_err());
    assert!(class_group(-1_000_003).is_err());
}

#[test]
fn supersingular_locus_of_37() {
    let v = parse(supersingular(37));
    assert_eq!(v["mass"], "3");
    assert_eq!(v["points"].as_array().map(Vec::len), Some(3));
    assert!(supersingular(1009).is_err());
}

#[test]
fn joint_reduction_of_minus_311() {
    let v = parse(joint_reduction(-311, "11, 23"));
    assert_eq!(v["h"], 19);
    assert_eq!(v["surjective"], true);
    assert!(joint_reduction(-311, "11,x").is_err());
    assert!(joint_reduction(-311, "11,11").is_err());
}

/// Six significant digits, trailing zeros kept.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Six significant digits followed by the shortest round-trip form.
pub fn both(x: f64) -> String {
    format!("{} [{}]", sig6(x), x)
}

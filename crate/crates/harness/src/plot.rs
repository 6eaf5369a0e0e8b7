//! Gnuplot script for a recorded trace.

/// Script plotting PCC voltage and plant power from `csv_name` (relative to
/// the script's directory) into `<stem>.png`.
pub fn gnuplot_script(csv_name: &str, title: &str, channels: &[&str]) -> String {
    let stem = csv_name.trim_end_matches(".csv");
    let mut s = String::new();
    s += "set datafile separator ','\n";
    s += &format!("set terminal pngcairo size 1000,{}\n", 300 * channels.len());
    s += &format!("set output '{stem}.png'\n");
    s += "set key autotitle columnhead\n";
    s += "set grid\n";
    s += "set xlabel 'time (s)'\n";
    s += &format!("set multiplot layout {},1 title '{title}'\n", channels.len());
    for c in channels {
        s += &format!("set ylabel '{c} (pu)'\n");
        s += &format!("plot '{csv_name}' using 'time':'{c}' with lines\n");
    }
    s += "unset multiplot\n";
    s
}

use super::InstanceError;
use std::fmt::Write as _;

/// One `CUSTOMER` row of a Solomon file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolomonRow {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: f64,
    pub ready: f64,
    pub due: f64,
    pub service: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolomonHeader {
    pub vehicles: usize,
    pub capacity: f64,
}

/// Contents of a Solomon VRPTW file. Row 0 is the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct SolomonInstance {
    pub name: String,
    pub header: SolomonHeader,
    pub depot: SolomonRow,
    pub customers: Vec<SolomonRow>,
}

impl SolomonInstance {
    pub fn total_demand(&self) -> f64 {
        self.customers.iter().map(|c| c.demand).sum()
    }

    /// Keeps the depot and the first `count` customers.
    pub fn truncated(&self, count: usize) -> Self {
        let mut out = self.clone();
        out.customers.truncate(count);
        out
    }
}

fn err(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse { line, message: message.into() }
}

fn numbers(line_no: usize, line: &str) -> Result<Vec<f64>, InstanceError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| err(line_no, format!("non-numeric field `{tok}`")))
        })
        .collect()
}

fn is_numeric_line(line: &str) -> bool {
    line.split_whitespace().next().is_some_and(|t| t.parse::<f64>().is_ok())
}

/// Parses the classic Solomon 100-customer text layout: a name line, a
/// `VEHICLE` block with `NUMBER CAPACITY`, then a `CUSTOMER` block with
/// rows `id x y demand ready due service`.
pub fn parse_solomon(text: &str) -> Result<SolomonInstance, InstanceError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut it = lines.iter().peekable();

    let &(_, name) = it.next().ok_or_else(|| err(1, "empty file"))?;

    let &(vehicle_line, vtag) = it
        .next()
        .ok_or_else(|| err(lines.len() + 1, "missing VEHICLE section"))?;
    if !vtag.eq_ignore_ascii_case("VEHICLE") {
        return Err(err(vehicle_line, "expected VEHICLE"));
    }
    // header labels, then the numbers
    while it.peek().is_some_and(|(_, l)| !is_numeric_line(l)) {
        it.next();
    }
    let &(vline, vtext) = it.next().ok_or_else(|| err(vehicle_line, "missing vehicle numbers"))?;
    let v = numbers(vline, vtext)?;
    if v.len() != 2 {
        return Err(err(vline, format!("expected NUMBER CAPACITY, found {} fields", v.len())));
    }
    let header = SolomonHeader { vehicles: v[0] as usize, capacity: v[1] };

    let &(cline, ctext) = it.next().ok_or_else(|| err(vline + 1, "missing CUSTOMER section"))?;
    if !ctext.eq_ignore_ascii_case("CUSTOMER") {
        return Err(err(cline, "expected CUSTOMER"));
    }
    while it.peek().is_some_and(|(_, l)| !is_numeric_line(l)) {
        it.next();
    }

    let mut rows = Vec::new();
    for &(n, l) in it {
        let f = numbers(n, l)?;
        if f.len() != 7 {
            return Err(err(n, format!("malformed customer row: expected 7 fields, found {}", f.len())));
        }
        if f[0] < 0.0 || f[0].fract() != 0.0 {
            return Err(err(n, format!("invalid customer id {}", f[0])));
        }
        rows.push((
            n,
            SolomonRow {
                id: f[0] as usize,
                x: f[1],
                y: f[2],
                demand: f[3],
                ready: f[4],
                due: f[5],
                service: f[6],
            },
        ));
    }
    let mut rows = rows.into_iter();
    let (dline, depot) = rows.next().ok_or_else(|| err(cline, "missing depot row"))?;
    if depot.id != 0 {
        return Err(err(dline, format!("first customer row must be the depot (id 0), found {}", depot.id)));
    }
    let customers = rows.map(|(_, r)| r).collect();
    Ok(SolomonInstance { name: name.to_string(), header, depot, customers })
}

/// Writes a Solomon file in the layout read by [`parse_solomon`].
pub fn write_solomon(inst: &SolomonInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", inst.name);
    out.push('\n');
    out.push_str("VEHICLE\nNUMBER     CAPACITY\n");
    let _ = writeln!(out, "  {:<10} {}", inst.header.vehicles, inst.header.capacity);
    out.push('\n');
    out.push_str("CUSTOMER\n");
    out.push_str("CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n\n");
    for r in std::iter::once(&inst.depot).chain(inst.customers.iter()) {
        let _ = writeln!(
            out,
            "{:5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            r.id, r.x, r.y, r.demand, r.ready, r.due, r.service
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "C101

VEHICLE
NUMBER     CAPACITY
  25         200

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME

    0      40         50          0          0       1236          0
    1      45         68         10        912        967         90
    2      45         70         30        825        870         90
";

    #[test]
    fn parses_header_depot_and_rows() {
        let inst = parse_solomon(SMALL).unwrap();
        assert_eq!(inst.name, "C101");
        assert_eq!(inst.header, SolomonHeader { vehicles: 25, capacity: 200.0 });
        assert_eq!(inst.depot.due, 1236.0);
        assert_eq!(inst.customers.len(), 2);
        assert_eq!(inst.customers[1].ready, 825.0);
        assert_eq!(inst.total_demand(), 40.0);
    }

    #[test]
    fn depot_only_gives_no_suppliers() {
        let text = SMALL.lines().take(10).collect::<Vec<_>>().join("\n");
        let inst = parse_solomon(&text).unwrap();
        assert!(inst.customers.is_empty());
    }

    #[test]
    fn empty_customer_section_is_an_error() {
        let text = SMALL.lines().take(9).collect::<Vec<_>>().join("\n");
        match parse_solomon(&text) {
            Err(InstanceError::Parse { message, .. }) => assert!(message.contains("depot")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_field_names_the_line() {
        let text = SMALL.replace("825", "8x5");
        match parse_solomon(&text) {
            Err(InstanceError::Parse { line, .. }) => assert_eq!(line, 12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_row_is_rejected() {
        let text = SMALL.replace("    2      45         70         30        825        870         90", "    2 45 70");
        assert!(matches!(parse_solomon(&text), Err(InstanceError::Parse { line: 12, .. })));
    }

    #[test]
    fn writer_output_parses_back() {
        let inst = parse_solomon(SMALL).unwrap();
        assert_eq!(parse_solomon(&write_solomon(&inst)).unwrap(), inst);
    }
}

//! Field dumps survive a round trip through disk.

use colehopf::{mollify, solve_heat_ito, Field, GridSpec, InitialDatum, Label, Mollifier, NoisePath};

fn solved() -> Field {
    let grid = GridSpec::new(1.0, 32, 0.02, 40).unwrap();
    let p = NoisePath::sample(grid, 42).unwrap();
    solve_heat_ito(&InitialDatum::default(), &mollify(&p, &Mollifier::new(4).unwrap()).unwrap()).unwrap()
}

#[test]
fn binary_roundtrip_is_exact() {
    let z = solved();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.bin");
    z.save_binary(&path).unwrap();
    let back = Field::load_binary(&path).unwrap();
    assert_eq!(back.label(), Label::Z);
    assert_eq!(back.seed(), 42);
    assert_eq!(back.grid(), z.grid());
    assert_eq!(back.materialize(), z.materialize());
    let len = std::fs::metadata(&path).unwrap().len() as usize;
    assert_eq!(len, 56 + 8 * z.grid().rows() * z.grid().nx);
}

#[test]
fn csv_lists_every_lattice_point() {
    let z = solved();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    z.save_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    let grid = z.grid();
    assert_eq!(rows.len(), grid.rows() * grid.nx);
    for (j, r) in rows.iter().enumerate() {
        let (k, i) = (j / grid.nx, j % grid.nx);
        assert_eq!(r[0], grid.t(k));
        assert_eq!(r[1], grid.x(i));
        assert_eq!(r[2], z.get(k, i));
    }
}

#[test]
fn truncated_dump_is_rejected() {
    let z = solved();
    let mut bytes = Vec::new();
    z.write_binary(&mut bytes).unwrap();
    assert!(Field::read_binary(&bytes[..bytes.len() - 8]).is_err());
    bytes[0] = b'X';
    assert!(Field::read_binary(&bytes[..]).unwrap_err().is_configuration());
}

//! σ transitions inside known subintervals, and rebuilding every driving
//! list of a subinterval from its first one.

use mmm_core::certify::{SweepConfig, Sweeper};
use mmm_core::perm::SigmaRow;
use mmm_core::rational::q;
use mmm_core::record::PieceRecord;
use mmm_core::stream::sigma_table;
use mmm_core::{apply_sigmas, CycleForm, Permutation, Piece, Side};

fn sweep(seed: &str, target: &str) -> Vec<PieceRecord> {
    let mut cfg = SweepConfig::new(q(seed), Side::Right);
    cfg.stop.target = Some(q(target));
    let (pieces, _) = Sweeper::new(cfg).unwrap().run_to_end().unwrap();
    pieces
        .iter()
        .map(|p| PieceRecord::from_piece(p, true))
        .collect()
}

fn cycles(rows: &[SigmaRow]) -> Vec<String> {
    rows.iter().map(|r| r.cycles.to_string()).collect()
}

fn parse_list(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Checks π_{k+1} = π_1 σ_1 … σ_k across the atoms whose driving lists have
/// length `len`.
fn assert_rebuilds(records: &[PieceRecord], rows: &[SigmaRow], len: usize) {
    let perms: Vec<Permutation> = records
        .iter()
        .filter(|r| r.driving().is_some_and(|d| d.len() == len))
        .map(|r| Permutation::from_driving_list(r.driving().unwrap()))
        .collect();
    assert_eq!(perms.len(), rows.len() + 1);
    let sigmas: Vec<CycleForm> = rows.iter().map(|r| r.cycles.clone()).collect();
    for k in 0..=sigmas.len() {
        assert_eq!(
            apply_sigmas(&perms[0], &sigmas[..k]).unwrap(),
            perms[k],
            "after {k} steps"
        );
    }
}

#[test]
fn second_subinterval_right_of_one_half() {
    let records = sweep("1/2", "341/666");
    let rows = sigma_table(&records, 2).unwrap();
    let expected: Vec<String> = (39..=72)
        .rev()
        .map(|k| format!("({k},{})", k + 1))
        .collect();
    assert_eq!(cycles(&rows), expected);
    assert_eq!(rows.first().unwrap().j, 1);
    assert_eq!(rows.last().unwrap().j, 34);
    assert_rebuilds(&records, &rows, 73);
}

// One transposition per step. At 14 steps two disjoint pairs of points cross
// at the same boundary, so σ there is a product of two transpositions and
// this list carries only one of them.
const THIRD_SINGLE_FACTORS: &str =
    "(41,42) (40,41) (42,43) (41,42) (43,44) (42,43) (63,64) (61,62) \
    (62,63) (60,61) (44,45) (43,44) (60,61) (58,59) (59,60) (57,58) (45,46) (44,45) \
    (58,59) (55,56) (46,47) (45,46) (56,57) (54,55) (55,56) (53,54) (47,48) (46,47) \
    (54,55) (52,53) (53,54) (51,52) (50,51) (52,53) (51,52) (49,50) (50,51) (48,49) \
    (47,48) (49,50) (48,49) (50,51) (49,50) (51,52) (52,53) (50,51) (51,52) (53,54) \
    (52,53) (54,55) (46,47) (47,48) (53,54) (55,56) (54,55) (56,57) (45,46) (46,47) \
    (55,56) (58,59) (44,45) (45,46) (57,58) (59,60) (58,59) (60,61) (43,44) (44,45) \
    (60,61) (62,63) (61,62) (63,64) (42,43) (43,44) (41,42) (42,43) (40,41) (41,42)";

#[test]
fn third_subinterval_right_of_one_half() {
    let records = sweep("1/2", "24073/47010");
    let rows = sigma_table(&records, 3).unwrap();
    let listed = parse_list(THIRD_SINGLE_FACTORS);
    assert_eq!(rows.len(), 78);
    let mut doubles = Vec::new();
    for (row, single) in rows.iter().zip(&listed) {
        let factors: Vec<String> = row
            .cycles
            .0
            .iter()
            .map(|c| CycleForm(vec![c.clone()]).to_string())
            .collect();
        assert!(
            factors.contains(single),
            "σ_{} = {} lacks {single}",
            row.j,
            row.cycles
        );
        if factors.len() > 1 {
            assert_eq!(factors.len(), 2);
            doubles.push(row.j);
        }
    }
    assert_eq!(
        doubles,
        [2, 5, 6, 11, 12, 18, 21, 58, 61, 67, 68, 73, 74, 77]
    );
    assert_eq!(rows[1].cycles.to_string(), "(40,41)(63,64)");
    assert_rebuilds(&records, &rows, 75);
}

#[test]
fn three_cycles_inside_a_long_subinterval() {
    let records = sweep("706817/1380274", "1413973/2761210");
    let rows = sigma_table(&records, 2).unwrap();
    let expected = parse_list(
        "(130,131) (129,130) (131,132) (130,131) (132,133) (131,132) (133,134) (132,133) \
         (134,135) (133,134) (135,136) (134,135) (136,137) (135,136) (137,138,139) \
         (136,137,138) (139,140) (138,139) (140,141)",
    );
    assert_eq!(cycles(&rows), expected);
    assert_rebuilds(&records, &rows, 253);
}

#[test]
fn disjoint_cycles_after_the_first_corner() {
    let records = sweep("2911001/5684610", "339/662");
    let rows = sigma_table(&records, 1).unwrap();
    assert_eq!(rows.len(), 188);
    assert_eq!(
        cycles(&rows[..4]),
        parse_list("(138,140,139) (139,141)(140,142) (141,143,142) (226,227)")
    );
    assert!(records
        .iter()
        .all(|r| match r.clone().into_piece().unwrap() {
            Piece::Atom(a) => a.len == 271,
            Piece::Singleton(s) => s.len == 271,
        }));
    assert_rebuilds(&records, &rows, 271);
}

#[test]
fn single_atom_subinterval_has_no_rows() {
    let records = sweep("1/2", "341/666");
    // the seed's own subinterval holds only the point 1/2
    assert!(sigma_table(&records, 1).unwrap().is_empty());
}

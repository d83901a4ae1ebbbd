//! End-to-end acceptance checks. Each test prints one `criterion N` line
//! straight to stdout so the verdicts show even when output is captured.

use std::collections::{BTreeSet, HashMap};
use std::io::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nielsen::action::{certify_alt_or_sym, induced_generators, k_transitivity, orbit_partition};
use nielsen::action::{CertifyOptions, Verdict, DEFAULT_STATE_BUDGET};
use nielsen::connect::{connect_basis, connect_stabilizing, ConnectOptions};
use nielsen::laws::{find_two_letter_law, kernel_element, strengthen_on_generating_pairs};
use nielsen::laws::{KernelOptions, LETTER_ORDER};
use nielsen::tuples::{
    build_matrix, d_power, hall_check, ClassTable, DiagonalClosure, GenMatrix, HallChecker,
    MatrixOptions, DEFAULT_TUPLE_BUDGET,
};
use nielsen::{load, Elem, FiniteGroup, NielsenMove, Word};

fn report(
    n: u32,
    title: &str,
    pass: bool,
    detail: &str,
    elapsed: Duration,
    limit: Duration,
) -> bool {
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    let line = format!(
        "criterion {n:>2} [{}] {title}: {detail} ({:.2}s, limit {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
    ok
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Canonical form by brute force over every automorphism.
fn brute_canonical(g: &FiniteGroup, t: &[Elem]) -> Vec<Elem> {
    let auts = g.automorphisms().unwrap();
    auts.iter().map(|s| s.apply_tuple(t)).min().unwrap()
}

fn random_tuple(g: &FiniteGroup, n: usize, rng: &mut ChaCha8Rng) -> Vec<Elem> {
    (0..n)
        .map(|_| rng.gen_range(0..g.order() as Elem))
        .collect()
}

#[test]
fn criterion_01_nielsen_calculus() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut violations = 0u32;
    let mut cases = 0u32;
    for spec in ["S4", "A5"] {
        let g = load(spec).unwrap();
        let auts = g.automorphisms().unwrap();
        for _ in 0..10_000 {
            let n = rng.gen_range(2..=4);
            let moves = NielsenMove::all(n);
            let m = moves[rng.gen_range(0..moves.len())];
            let t = random_tuple(&g, n, &mut rng);
            let s = auts.get(rng.gen_range(0..auts.len()));
            let mt = m.apply(&g, &t).unwrap();
            let back = m.inverse().apply(&g, &mt).unwrap();
            let equivariant = m.apply(&g, &s.apply_tuple(&t)).unwrap() == s.apply_tuple(&mt);
            if back != t || !equivariant || g.generates(&t) != g.generates(&mt) {
                violations += 1;
            }
            cases += 1;
        }
    }
    let ok = report(
        1,
        "Nielsen calculus on S4, A5",
        violations == 0,
        &format!("{violations} violations in {cases} cases"),
        start.elapsed(),
        secs(10),
    );
    assert!(ok);
}

/// `|<(x, u), (y, v)>|` in `G^2` by breadth-first search over a flat
/// table, stopping once more than half of `G^2` is reached.
struct PairClosure {
    order: usize,
    mul: Vec<u16>,
    seen: Vec<u64>,
    queue: Vec<u32>,
}

impl PairClosure {
    fn new(g: &FiniteGroup) -> Self {
        let order = g.order();
        let mul = (0..order * order)
            .map(|i| g.mul((i / order) as Elem, (i % order) as Elem) as u16)
            .collect();
        PairClosure {
            order,
            mul,
            seen: vec![0; (order * order).div_ceil(64)],
            queue: Vec::with_capacity(order * order),
        }
    }

    fn size(&mut self, rows: [(Elem, Elem); 2]) -> usize {
        let o = self.order;
        let total = o * o;
        self.seen.iter_mut().for_each(|w| *w = 0);
        self.queue.clear();
        self.seen[0] = 1;
        self.queue.push(0);
        let mut head = 0;
        while head < self.queue.len() {
            let code = self.queue[head] as usize;
            head += 1;
            let (a, b) = (code / o, code % o);
            for &(x, y) in &rows {
                let next = self.mul[a * o + x as usize] as usize * o
                    + self.mul[b * o + y as usize] as usize;
                let (w, bit) = (next / 64, 1u64 << (next % 64));
                if self.seen[w] & bit == 0 {
                    self.seen[w] |= bit;
                    self.queue.push(next as u32);
                    if 2 * self.queue.len() > total {
                        return total;
                    }
                }
            }
        }
        self.queue.len()
    }
}

#[test]
fn criterion_02_hall_equivalence() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let pairs: Vec<(Elem, Elem)> = g
        .elements()
        .flat_map(|a| g.elements().map(move |b| (a, b)))
        .filter(|&(a, b)| g.generates(&[a, b]))
        .collect();
    let mut class_of = HashMap::new();
    let class: Vec<Vec<Elem>> = pairs
        .iter()
        .map(|&(a, b)| brute_canonical(&g, &[a, b]))
        .collect();
    for c in &class {
        let next = class_of.len();
        class_of.entry(c.clone()).or_insert(next);
    }
    let ids: Vec<usize> = class.iter().map(|c| class_of[c]).collect();

    let mut closure = PairClosure::new(&g);
    let full = g.order() * g.order();
    let (mut violations, mut distinct, mut matrices) = (0u64, 0u64, 0u64);
    for (p, &(a1, a2)) in pairs.iter().enumerate() {
        for (q, &(b1, b2)) in pairs.iter().enumerate() {
            // Columns (a1, a2) and (b1, b2); rows (a1, b1) and (a2, b2).
            let classes_distinct = ids[p] != ids[q];
            let surjective = closure.size([(a1, b1), (a2, b2)]) == full;
            violations += u64::from(classes_distinct != surjective);
            distinct += u64::from(classes_distinct);
            matrices += 1;
        }
    }

    // k = 3: a thousand sampled matrices, half with a forced class repeat.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let auts = g.automorphisms().unwrap();
    let mut closure3 = DiagonalClosure::new(g.order(), 3, 1 << 30).unwrap();
    let mut hall = HallChecker::new(&g, 3, 1 << 30).unwrap();
    let mut sampled_violations = 0u32;
    for i in 0..1000 {
        let mut cols: Vec<usize> = (0..3).map(|_| rng.gen_range(0..pairs.len())).collect();
        if i % 2 == 0 {
            let s = auts.get(rng.gen_range(0..auts.len()));
            let (a, b) = pairs[cols[0]];
            let image = (s.apply(a), s.apply(b));
            cols[2] = pairs.iter().position(|&p| p == image).unwrap();
        }
        let classes_distinct = ids[cols[0]] != ids[cols[1]]
            && ids[cols[0]] != ids[cols[2]]
            && ids[cols[1]] != ids[cols[2]];
        let row0: Vec<Elem> = cols.iter().map(|&c| pairs[c].0).collect();
        let row1: Vec<Elem> = cols.iter().map(|&c| pairs[c].1).collect();
        let surjective = closure3.size(&g, &[&row0, &row1]) == closure3.product_order();
        let m = GenMatrix::new(&g, 2, 3, [row0, row1].concat()).unwrap();
        let r = hall.check(&m).unwrap();
        if classes_distinct != surjective
            || r.classes_distinct != classes_distinct
            || r.diagonal_surjective != surjective
        {
            sampled_violations += 1;
        }
    }
    let ok = report(
        2,
        "Hall criterion equivalence in A5",
        violations == 0 && sampled_violations == 0 && matrices == 2280 * 2280,
        &format!(
            "k=2: {violations} violations over {matrices} matrices ({distinct} class-distinct); \
             k=3: {sampled_violations} violations over 1000 samples"
        ),
        start.elapsed(),
        secs(120),
    );
    assert!(ok);
}

#[test]
fn criterion_03_t_system_counts() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let mut count = 0u64;
    let mut classes = BTreeSet::new();
    for a in g.elements() {
        for b in g.elements() {
            if g.generates(&[a, b]) {
                count += 1;
                classes.insert(brute_canonical(&g, &[a, b]));
            }
        }
    }
    let table = ClassTable::build(&g, 2, DEFAULT_TUPLE_BUDGET).unwrap();
    let d19 = d_power(&g, 19, DEFAULT_TUPLE_BUDGET).unwrap().d_power;
    let d20 = d_power(&g, 20, DEFAULT_TUPLE_BUDGET).unwrap().d_power;
    let reps: BTreeSet<Vec<Elem>> = table.representatives().map(<[Elem]>::to_vec).collect();
    let pass = count == 2280
        && classes.len() == 19
        && table.tuple_count() == 2280
        && table.len() == 19
        && reps == classes
        && d19 == 2
        && d20 == 3;
    let ok = report(
        3,
        "T-system counts for A5",
        pass,
        &format!(
            "|V2| = {count} (table {}), |V2/Aut| = {} (table {}), d(A5^19) = {d19}, d(A5^20) = {d20}",
            table.tuple_count(),
            classes.len(),
            table.len()
        ),
        start.elapsed(),
        secs(60),
    );
    assert!(ok);
}

#[test]
fn criterion_04_single_orbit() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let table = ClassTable::build(&g, 3, DEFAULT_TUPLE_BUDGET).unwrap();
    let action = induced_generators(&table).unwrap();
    let orbits = orbit_partition(&action);
    let ok = report(
        4,
        "orbits on generating triples of A5",
        orbits.len() == 1 && table.len() == 1668,
        &format!("{} classes, {} orbit(s)", table.len(), orbits.len()),
        start.elapsed(),
        secs(600),
    );
    assert!(ok);
}

#[test]
fn criterion_05_two_transitive() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let table = ClassTable::build(&g, 3, DEFAULT_TUPLE_BUDGET).unwrap();
    let action = induced_generators(&table).unwrap();
    let kt = k_transitivity(&action, 2, DEFAULT_STATE_BUDGET).unwrap();
    let cert = certify_alt_or_sym(&action, &CertifyOptions::default());
    let pass = kt.transitive && matches!(cert.verdict, Verdict::Alternating | Verdict::Symmetric);
    let ok = report(
        5,
        "2-transitivity and Alt/Sym on generating triples of A5",
        pass,
        &format!(
            "2-transitive = {}, verdict = {:?} by {} (degree {})",
            kt.transitive, cert.verdict, cert.method, cert.degree
        ),
        start.elapsed(),
        secs(900),
    );
    assert!(ok);
}

#[test]
fn criterion_06_basis_pipeline() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let led = |rng: &mut ChaCha8Rng| loop {
        let t = random_tuple(&g, 3, rng);
        if g.generates(&[t[0], t[1]]) {
            return t;
        }
    };
    let opts = ConnectOptions::default();
    let mut verified = 0;
    let mut failures = Vec::new();
    for case in 0..100 {
        let gt = led(&mut rng);
        let ht = loop {
            let h = led(&mut rng);
            if h != gt {
                break h;
            }
        };
        let res = match connect_basis(&g, &gt, &ht, &opts) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let z = res.stages[1].tuple_after[2];
        let expected = [
            vec![gt[0], gt[1], z],
            vec![ht[0], gt[1], z],
            vec![ht[0], ht[1], z],
            ht.clone(),
        ];
        let z_ok = g.generates(&[gt[1], z]) && g.generates(&[ht[0], z]);
        let staged: Vec<Vec<Elem>> = res.stages[1..5]
            .iter()
            .map(|s| s.tuple_after.clone())
            .collect();
        let mut replay = gt.clone();
        let mut replay_ok = true;
        for (stage, want) in res.stages[1..5].iter().zip(&expected) {
            for m in &res.moves.moves()[stage.start..stage.end] {
                m.act(&g, &mut replay);
            }
            replay_ok &= &replay == want;
        }
        let full = res.moves.apply(&g, &gt).unwrap() == ht;
        if res.verified && full && z_ok && replay_ok && staged == expected {
            verified += 1;
        } else {
            failures.push(format!("case {case}"));
        }
    }
    let ok = report(
        6,
        "basis pipeline on random A5 triples",
        verified == 100,
        &format!("{verified}/100 verified with the displayed intermediate tuples {failures:?}"),
        start.elapsed(),
        secs(300),
    );
    assert!(ok);
}

#[test]
fn criterion_07_stabilizing_pipeline() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let (pass, detail) = match build_matrix(&g, 4, 3, &MatrixOptions::default()) {
        Err(e) => (false, format!("build_matrix(A5, 4, 3) failed: {e}")),
        Ok((a, _)) => {
            let auts = g.automorphisms().unwrap();
            let fixed: Vec<Vec<Elem>> = a.columns()[..2].to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let mut verified = 0;
            let mut tried = 0;
            while tried < 25 {
                let h = random_tuple(&g, 4, &mut rng);
                if !g.generates(&h)
                    || fixed
                        .iter()
                        .any(|c| auts.canonical(c) == auts.canonical(&h))
                {
                    continue;
                }
                tried += 1;
                if let Ok(res) = connect_stabilizing(&g, &a, &h, &ConnectOptions::default()) {
                    let classes_fixed = fixed.iter().all(|c| {
                        auts.canonical(&res.moves.apply(&g, c).unwrap()) == auts.canonical(c)
                    });
                    let lands = auts.canonical(&res.moves.apply(&g, &a.column(2)).unwrap())
                        == auts.canonical(&h);
                    verified += usize::from(res.verified && classes_fixed && lands);
                }
            }
            (verified == 25, format!("{verified}/25 verified"))
        }
    };
    let ok = report(
        7,
        "stabilizing pipeline with a 4x3 matrix over A5",
        pass,
        &detail,
        start.elapsed(),
        secs(900),
    );
    assert!(ok, "{detail}");
}

/// Whether the off-diagonal pattern `M[a][b] = σ_b(x_a)` occurs for some
/// automorphisms `σ_b` and elements `x_a`. Normalizes `σ_1 = id`.
fn config_exists(g: &FiniteGroup, m: &[[Elem; 4]; 4]) -> bool {
    let auts = g.automorphisms().unwrap();
    let x2 = m[1][0];
    let x3 = m[2][0];
    let x4 = m[3][0];
    auts.iter().any(|s2| {
        if s2.apply(x3) != m[2][1] || s2.apply(x4) != m[3][1] {
            return false;
        }
        let Some(x1) = g.elements().find(|&x| s2.apply(x) == m[0][1]) else {
            return false;
        };
        let s3 = auts
            .iter()
            .any(|s| s.apply(x1) == m[0][2] && s.apply(x2) == m[1][2] && s.apply(x4) == m[3][2]);
        let s4 = auts
            .iter()
            .any(|s| s.apply(x1) == m[0][3] && s.apply(x2) == m[1][3] && s.apply(x3) == m[2][3]);
        s3 && s4
    })
}

/// Scans every choice of 4 columns and every ordered choice of 4 rows.
fn has_forbidden_minor(g: &FiniteGroup, a: &GenMatrix) -> bool {
    let (n, k) = (a.rows(), a.cols());
    if k < 4 || n < 4 {
        return false;
    }
    let col_sets = (0..k).flat_map(|c0| {
        (c0 + 1..k).flat_map(move |c1| {
            (c1 + 1..k).flat_map(move |c2| (c2 + 1..k).map(move |c3| [c0, c1, c2, c3]))
        })
    });
    for cols in col_sets {
        for r0 in 0..n {
            for r1 in (0..n).filter(|&r| r != r0) {
                for r2 in (0..n).filter(|&r| r != r0 && r != r1) {
                    for r3 in (0..n).filter(|&r| r != r0 && r != r1 && r != r2) {
                        let rows = [r0, r1, r2, r3];
                        let m = rows.map(|r| cols.map(|c| a.get(r, c)));
                        if config_exists(g, &m) {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

#[test]
fn criterion_08_lemma_matrix() {
    let start = Instant::now();
    let g = load("A5").unwrap();
    let (pass, detail) = match build_matrix(&g, 4, 2, &MatrixOptions::default()) {
        Err(e) => (false, format!("build_matrix(A5, 4, 2) failed: {e}")),
        Ok((a, _)) => {
            let cells: Vec<Elem> = a.entries().to_vec();
            let mut bad_pairs = 0;
            for i in 0..cells.len() {
                for j in i + 1..cells.len() {
                    bad_pairs += usize::from(!g.generates(&[cells[i], cells[j]]));
                }
            }
            let mut bad_triples = 0;
            for r0 in 0..4 {
                for r1 in r0 + 1..4 {
                    for r2 in r1 + 1..4 {
                        let sub = a.select_rows(&[r0, r1, r2]);
                        let rep = hall_check(&g, &sub, 1 << 30).unwrap();
                        let cols = sub.columns();
                        let distinct =
                            brute_canonical(&g, &cols[0]) != brute_canonical(&g, &cols[1]);
                        let good = rep.columns_generate
                            && rep.diagonal_surjective
                            && rep.classes_distinct
                            && distinct;
                        bad_triples += usize::from(!good);
                    }
                }
            }
            let forbidden = has_forbidden_minor(&g, &a);
            // The scanner must recognize a planted configuration.
            let auts = g.automorphisms().unwrap();
            let xs = [cells[0], cells[1], cells[2], cells[3]];
            let sig: Vec<_> = (0..4)
                .map(|i| auts.get((i * 37 + 5) % auts.len()))
                .collect();
            let mut planted = [[0 as Elem; 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    planted[r][c] = if r == c {
                        cells[4]
                    } else {
                        sig[c].apply(xs[r])
                    };
                }
            }
            let detects = config_exists(&g, &planted);
            (
                bad_pairs == 0 && bad_triples == 0 && !forbidden && detects,
                format!(
                    "{bad_pairs} non-generating entry pairs, {bad_triples} failing row triples, \
                     forbidden minor: {forbidden} (planted one detected: {detects})"
                ),
            )
        }
    };
    let ok = report(
        8,
        "Lemma matrix 4x2 over A5",
        pass,
        &detail,
        start.elapsed(),
        secs(300),
    );
    assert!(ok, "{detail}");
}

fn x(i: usize, rank: usize) -> Word {
    Word::generator(i, rank)
}

#[test]
fn criterion_09_law_machinery() {
    let start = Instant::now();
    let v4 = load("C2xC2").unwrap();
    let s3 = load("S3").unwrap();
    let a5 = load("A5").unwrap();
    let opts = KernelOptions::default();
    let law = find_two_letter_law(&v4, 4);
    let law_ok = law
        .as_ref()
        .is_some_and(|l| l.word.len() <= 4 && l.reverify(&v4));
    let comm = x(1, 2).commutator(&x(2, 2));
    let k4 = kernel_element(&v4, &comm, 4, &opts).unwrap();
    let k4_ok = k4.non_inner && k4.acts_trivially && k4.exhaustive && k4.tuples_checked == 256;
    let k3 = kernel_element(&s3, &x(1, 2).pow(6), 3, &opts).unwrap();
    let k3_ok = k3.acts_trivially && k3.exhaustive && k3.tuples_checked == 216;
    let a5_law = find_two_letter_law(&a5, 8);
    let ok = report(
        9,
        "law machinery",
        law_ok && k4_ok && k3_ok && a5_law.is_none(),
        &format!(
            "C2xC2 law {:?}; [x1,x2] kernel on C2xC2: non-inner {}, fixes {}/256; \
             x1^6 on S3 fixes {}/216; A5 law up to length 8: {:?}",
            law.map(|l| l.word.pretty()),
            k4.non_inner,
            if k4.acts_trivially {
                k4.tuples_checked
            } else {
                0
            },
            if k3.acts_trivially {
                k3.tuples_checked
            } else {
                0
            },
            a5_law.map(|l| l.word.pretty()),
        ),
        start.elapsed(),
        secs(300),
    );
    assert!(ok);
}

#[test]
fn criterion_10_strengthened_laws() {
    let start = Instant::now();
    let mut words: Vec<Word> = Vec::new();
    let mut layer: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..6 {
        let mut next = Vec::new();
        for p in &layer {
            for l in LETTER_ORDER {
                if p.last() != Some(&-l) {
                    next.push([p.as_slice(), &[l]].concat());
                }
            }
        }
        words.extend(next.iter().map(|l| Word::new(l.clone(), 2).unwrap()));
        layer = next;
    }
    let mut violations = 0;
    let mut laws = 0;
    let mut per_group = Vec::new();
    for spec in ["S3", "Q8", "C3xC3"] {
        let g = load(spec).unwrap();
        let all: Vec<(Elem, Elem)> = g
            .elements()
            .flat_map(|a| g.elements().map(move |b| (a, b)))
            .collect();
        let gen: Vec<(Elem, Elem)> = all
            .iter()
            .copied()
            .filter(|&(a, b)| g.generates(&[a, b]))
            .collect();
        let vanishes = |w: &Word, on: &[(Elem, Elem)]| {
            on.iter()
                .all(|&(a, b)| w.evaluate(&g, &[a, b]).unwrap() == 0)
        };
        let mut here = 0;
        for w in &words {
            if !vanishes(w, &gen) {
                continue;
            }
            here += 1;
            let v = strengthen_on_generating_pairs(w).unwrap();
            let reduced = v.letters().windows(2).all(|p| p[0] != -p[1]);
            if v.is_identity() || !reduced || v.len() != 2 * w.len() + 2 || !vanishes(&v, &all) {
                violations += 1;
            }
        }
        laws += here;
        per_group.push(format!("{spec}: {here}"));
    }
    let ok = report(
        10,
        "strengthening laws from generating pairs",
        violations == 0 && laws > 0,
        &format!(
            "{violations} violations over {laws} words vanishing on generating pairs ({})",
            per_group.join(", ")
        ),
        start.elapsed(),
        secs(300),
    );
    assert!(ok);
}

//! Constructors for the named instance families used across the test suites
//! and the CLI, plus seeded random samplers (general, series-parallel,
//! outerplanar).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Edge, EdgeId, GameInstance, PriorityScheme, Time, Walk};
use crate::validate::{dijkstra, validate_instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    /// `b` parallel three-edge paths with prioritized cross edges; entry
    /// edges cost 1, everything else 0.
    Braess { b: usize },
    /// Same graph with strictly positive transit times; every s-t path
    /// costs `2b + 1`.
    BraessPositive { b: usize },
    /// Same graph, exit edges cost 1 except the lowest; social optima here
    /// are unstable.
    PosBraess { b: usize },
    /// Braess graph extended by a rear zigzag; both zigzags prioritized.
    DoubleBraessLeft { b: usize },
    /// Rear zigzag prioritized, entry edges prioritized except the lowest.
    DoubleBraessRight { b: usize },
    /// Three nodes, `k` parallel entry edges, `k - 2` self-loops, one exit;
    /// global priority by edge index. Forces repeated node visits.
    Loop { k: usize },
    /// Wide entry edge feeding a slow and a fast exit; the earliest arrival
    /// pattern is not an equilibrium here.
    Fig6,
    /// Seven-node network where no priority orientation of the middle join
    /// reproduces the earliest arrival flow; gap grows with `m`.
    Fig7 { m: Time },
    /// Five-node network with a feasible constructed priority list that
    /// still admits no system-optimal equilibrium.
    Fig8,
    /// Two zero-cost cycles that make path embeddings ambiguous; rejected
    /// by validation, used to test the validator.
    ZeroCycle,
}

impl FamilySpec {
    /// Player count each family is analyzed with.
    pub fn default_players(&self) -> usize {
        match *self {
            FamilySpec::Braess { b }
            | FamilySpec::BraessPositive { b }
            | FamilySpec::PosBraess { b }
            | FamilySpec::DoubleBraessLeft { b }
            | FamilySpec::DoubleBraessRight { b } => b,
            FamilySpec::Loop { k } => k,
            FamilySpec::Fig6 => 4,
            FamilySpec::Fig7 { m } => 3 * m as usize + 1,
            FamilySpec::Fig8 => 9,
            FamilySpec::ZeroCycle => 2,
        }
    }
}

pub fn generate(spec: FamilySpec) -> Result<GameInstance> {
    Ok(match spec {
        FamilySpec::Braess { b } => braess(b)?.instance,
        FamilySpec::BraessPositive { b } => braess_positive(b)?.instance,
        FamilySpec::PosBraess { b } => pos_braess(b)?.instance,
        FamilySpec::DoubleBraessLeft { b } => double_braess(b, DoubleBraessVariant::Left)?.instance,
        FamilySpec::DoubleBraessRight { b } => {
            double_braess(b, DoubleBraessVariant::Right)?.instance
        }
        FamilySpec::Loop { k } => loop_network(k)?.instance,
        FamilySpec::Fig6 => fig6().instance,
        FamilySpec::Fig7 { m } => fig7(m, true)?.instance,
        FamilySpec::Fig8 => fig8().instance,
        FamilySpec::ZeroCycle => zero_cycle(),
    })
}

/// The Braess-style graph: rows of three-edge paths `s -> x_i -> y_i -> t`
/// plus cross edges `y_i -> x_{i+1}` that outrank the entry edges at their
/// target.
#[derive(Debug, Clone)]
pub struct Braess {
    pub instance: GameInstance,
    pub b: usize,
    /// `s -> x_i`, top to bottom.
    pub s_edges: Vec<EdgeId>,
    /// `x_i -> y_i`.
    pub mid_edges: Vec<EdgeId>,
    /// `y_i -> t`, top to bottom.
    pub t_edges: Vec<EdgeId>,
    /// `y_i -> x_{i+1}`.
    pub cross_edges: Vec<EdgeId>,
}

impl Braess {
    /// The direct path along row `i`.
    pub fn parallel_walk(&self, row: usize) -> Walk {
        Walk(vec![self.s_edges[row], self.mid_edges[row], self.t_edges[row]])
    }

    /// Top entry, then every cross edge, exiting at the bottom row.
    pub fn zigzag_walk(&self) -> Walk {
        let mut edges = vec![self.s_edges[0]];
        for i in 0..self.b {
            edges.push(self.mid_edges[i]);
            if i + 1 < self.b {
                edges.push(self.cross_edges[i]);
            }
        }
        edges.push(self.t_edges[self.b - 1]);
        Walk(edges)
    }
}

fn braess_graph(b: usize, s_cost: impl Fn(usize) -> Time, inner_cost: Time, t_cost: impl Fn(usize) -> Time) -> Result<Braess> {
    if b < 2 {
        return Err(Error::InvalidParameter("braess families need b >= 2".into()));
    }
    let mut names = vec!["s".to_string()];
    names.extend((1..=b).map(|i| format!("x{i}")));
    names.extend((1..=b).map(|i| format!("y{i}")));
    names.push("t".to_string());
    let x = |i: usize| 1 + i;
    let y = |i: usize| 1 + b + i;
    let t = 2 * b + 1;

    let mut edges = Vec::new();
    let s_edges: Vec<EdgeId> = (0..b)
        .map(|i| {
            edges.push(Edge { tail: 0, head: x(i), capacity: 1, transit: s_cost(i) });
            edges.len() - 1
        })
        .collect();
    let mid_edges: Vec<EdgeId> = (0..b)
        .map(|i| {
            edges.push(Edge { tail: x(i), head: y(i), capacity: 1, transit: inner_cost });
            edges.len() - 1
        })
        .collect();
    let t_edges: Vec<EdgeId> = (0..b)
        .map(|i| {
            edges.push(Edge { tail: y(i), head: t, capacity: 1, transit: t_cost(i) });
            edges.len() - 1
        })
        .collect();
    let cross_edges: Vec<EdgeId> = (0..b - 1)
        .map(|i| {
            edges.push(Edge { tail: y(i), head: x(i + 1), capacity: 1, transit: inner_cost });
            edges.len() - 1
        })
        .collect();

    let mut lists = vec![Vec::new(); edges.len()];
    // Only the x nodes see competition; cross edges outrank entry edges.
    lists[mid_edges[0]] = vec![s_edges[0]];
    for i in 1..b {
        lists[mid_edges[i]] = vec![cross_edges[i - 1], s_edges[i]];
    }
    for i in 0..b {
        lists[t_edges[i]] = vec![mid_edges[i]];
        if i + 1 < b {
            lists[cross_edges[i]] = vec![mid_edges[i]];
        }
    }

    let instance = GameInstance {
        node_names: names,
        edges,
        source: 0,
        sink: t,
        players: b,
        priority: PriorityScheme::Local(lists),
    };
    Ok(Braess { instance, b, s_edges, mid_edges, t_edges, cross_edges })
}

pub fn braess(b: usize) -> Result<Braess> {
    braess_graph(b, |_| 1, 0, |_| 0)
}

pub fn braess_positive(b: usize) -> Result<Braess> {
    // Entry costs 1, 3, ..., 2b-1 top-down; exit costs the same bottom-up;
    // inner edges cost 1. Every s-t path then costs 2b + 1.
    braess_graph(b, |i| (2 * i + 1) as Time, 1, |i| (2 * (b - i) - 1) as Time)
}

pub fn pos_braess(b: usize) -> Result<Braess> {
    braess_graph(b, |_| 1, 0, |i| if i + 1 == b { 0 } else { 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoubleBraessVariant {
    /// Both zigzag paths outrank everything they cross.
    Left,
    /// Entry edges outrank the front zigzag (except at the bottom row, where
    /// the front zigzag keeps priority); the rear zigzag stays prioritized.
    Right,
}

#[derive(Debug, Clone)]
pub struct DoubleBraess {
    pub instance: GameInstance,
    pub b: usize,
    pub variant: DoubleBraessVariant,
    pub s_edges: Vec<EdgeId>,
    /// Full horizontal walk of each row, top to bottom.
    pub row_walks: Vec<Walk>,
    pub t_edges: Vec<EdgeId>,
    /// Front zigzag, top to bottom.
    pub front_zigzag: Vec<EdgeId>,
    /// Rear zigzag, bottom to top.
    pub rear_zigzag: Vec<EdgeId>,
}

pub fn double_braess(b: usize, variant: DoubleBraessVariant) -> Result<DoubleBraess> {
    if b < 3 {
        return Err(Error::InvalidParameter("double-braess families need b >= 3".into()));
    }
    let mut names = vec!["s".to_string()];
    let mut edges: Vec<Edge> = Vec::new();
    let node = |names: &mut Vec<String>, name: String| -> usize {
        names.push(name);
        names.len() - 1
    };

    // Per row: entry node(s) on the front side, exit node(s) on the rear
    // side. Top and bottom rows have one node per side, middle rows two.
    struct Row {
        front_in: usize,
        front_out: usize,
        rear_in: usize,
        rear_out: usize,
    }
    let mut rows = Vec::with_capacity(b);
    for r in 0..b {
        if r == 0 || r == b - 1 {
            let f = node(&mut names, format!("f{r}"));
            let rr = node(&mut names, format!("r{r}"));
            rows.push(Row { front_in: f, front_out: f, rear_in: rr, rear_out: rr });
        } else {
            let fa = node(&mut names, format!("f{r}a"));
            let fb = node(&mut names, format!("f{r}b"));
            let ra = node(&mut names, format!("r{r}a"));
            let rb = node(&mut names, format!("r{r}b"));
            rows.push(Row { front_in: fa, front_out: fb, rear_in: ra, rear_out: rb });
        }
    }
    let t = node(&mut names, "t".to_string());

    let push = |edges: &mut Vec<Edge>, tail: usize, head: usize, transit: Time| -> EdgeId {
        edges.push(Edge { tail, head, capacity: 1, transit });
        edges.len() - 1
    };

    let mut s_edges = Vec::new();
    let mut front_horiz = vec![None; b];
    let mut cross = Vec::new();
    let mut rear_horiz = vec![None; b];
    let mut t_edges = Vec::new();
    for r in 0..b {
        s_edges.push(push(&mut edges, 0, rows[r].front_in, 1));
        if rows[r].front_in != rows[r].front_out {
            front_horiz[r] = Some(push(&mut edges, rows[r].front_in, rows[r].front_out, 0));
        }
        cross.push(push(&mut edges, rows[r].front_out, rows[r].rear_in, 0));
        if rows[r].rear_in != rows[r].rear_out {
            rear_horiz[r] = Some(push(&mut edges, rows[r].rear_in, rows[r].rear_out, 0));
        }
        t_edges.push(push(&mut edges, rows[r].rear_out, t, 0));
    }
    let front_zigzag: Vec<EdgeId> =
        (0..b - 1).map(|r| push(&mut edges, rows[r].front_out, rows[r + 1].front_in, 0)).collect();
    let rear_zigzag: Vec<EdgeId> = (0..b - 1)
        .rev()
        .map(|r| push(&mut edges, rows[r + 1].rear_out, rows[r].rear_in, 0))
        .collect();

    let mut lists = vec![Vec::new(); edges.len()];
    // Front side: entry edge vs. front zigzag at the row's first node.
    for r in 1..b {
        let fzz = front_zigzag[r - 1];
        let target = if r == b - 1 { cross[r] } else { front_horiz[r].unwrap() };
        let front_zz_first = match variant {
            DoubleBraessVariant::Left => true,
            DoubleBraessVariant::Right => r == b - 1,
        };
        lists[target] = if front_zz_first { vec![fzz, s_edges[r]] } else { vec![s_edges[r], fzz] };
    }
    // Rear side: the rear zigzag outranks the row's own cross edge in both
    // variants.
    for r in 0..b - 1 {
        let rzz = rear_zigzag[b - 2 - r];
        let target = if r == 0 { t_edges[0] } else { rear_horiz[r].unwrap() };
        lists[target] = vec![rzz, cross[r]];
    }
    // Every remaining target has a single incoming edge at its tail.
    lists[cross[0]] = vec![s_edges[0]];
    lists[front_zigzag[0]] = vec![s_edges[0]];
    lists[t_edges[b - 1]] = vec![cross[b - 1]];
    lists[rear_zigzag[0]] = vec![cross[b - 1]];
    for r in 1..b - 1 {
        lists[front_zigzag[r]] = vec![front_horiz[r].unwrap()];
        lists[cross[r]] = vec![front_horiz[r].unwrap()];
        lists[t_edges[r]] = vec![rear_horiz[r].unwrap()];
        lists[rear_zigzag[b - 1 - r]] = vec![rear_horiz[r].unwrap()];
    }

    let row_walks: Vec<Walk> = (0..b)
        .map(|r| {
            let mut w = vec![s_edges[r]];
            if let Some(e) = front_horiz[r] {
                w.push(e);
            }
            w.push(cross[r]);
            if let Some(e) = rear_horiz[r] {
                w.push(e);
            }
            w.push(t_edges[r]);
            Walk(w)
        })
        .collect();

    let instance = GameInstance {
        node_names: names,
        edges,
        source: 0,
        sink: t,
        players: b,
        priority: PriorityScheme::Local(lists),
    };
    Ok(DoubleBraess { instance, b, variant, s_edges, row_walks, t_edges, front_zigzag, rear_zigzag })
}

/// Loop network: `k` parallel entry edges, `k - 2` self-loops at the middle
/// node and a single exit edge, all unit capacity and unit transit, ranked
/// globally by edge id. Edge 0 is the exit, 1..k-2 the loops, the rest the
/// entries.
#[derive(Debug, Clone)]
pub struct LoopNetwork {
    pub instance: GameInstance,
    pub k: usize,
    pub exit_edge: EdgeId,
    pub loop_edges: Vec<EdgeId>,
    pub entry_edges: Vec<EdgeId>,
}

impl LoopNetwork {
    /// The unique equilibrium walk of player `p` (0-based, `p < k - 1`):
    /// entry edge `p`, then every loop from the `p`-th down, then the exit.
    pub fn pne_walk(&self, p: usize) -> Walk {
        let mut edges = vec![self.entry_edges[p]];
        for id in (1..=p).rev() {
            edges.push(id); // loop edges carry ids 1..=k-2
        }
        edges.push(self.exit_edge);
        Walk(edges)
    }
}

pub fn loop_network(k: usize) -> Result<LoopNetwork> {
    if k < 3 {
        return Err(Error::InvalidParameter("loop networks need k >= 3".into()));
    }
    let (s, v, t) = (0, 1, 2);
    let mut edges = vec![Edge { tail: v, head: t, capacity: 1, transit: 1 }];
    let loop_edges: Vec<EdgeId> = (0..k - 2)
        .map(|_| {
            edges.push(Edge { tail: v, head: v, capacity: 1, transit: 1 });
            edges.len() - 1
        })
        .collect();
    let entry_edges: Vec<EdgeId> = (0..k)
        .map(|_| {
            edges.push(Edge { tail: s, head: v, capacity: 1, transit: 1 });
            edges.len() - 1
        })
        .collect();
    let order = (0..edges.len()).collect();
    let instance = GameInstance {
        node_names: vec!["s".into(), "v".into(), "t".into()],
        edges,
        source: s,
        sink: t,
        players: k,
        priority: PriorityScheme::Global(order),
    };
    Ok(LoopNetwork { instance, k, exit_edge: 0, loop_edges, entry_edges })
}

#[derive(Debug, Clone)]
pub struct Fig6 {
    pub instance: GameInstance,
    pub entry: EdgeId,
    pub slow_exit: EdgeId,
    pub fast_exit: EdgeId,
}

impl Fig6 {
    pub fn slow_walk(&self) -> Walk {
        Walk(vec![self.entry, self.slow_exit])
    }

    pub fn fast_walk(&self) -> Walk {
        Walk(vec![self.entry, self.fast_exit])
    }
}

pub fn fig6() -> Fig6 {
    let instance = GameInstance {
        node_names: vec!["s".into(), "v".into(), "t".into()],
        edges: vec![
            Edge { tail: 0, head: 1, capacity: 2, transit: 0 },
            Edge { tail: 1, head: 2, capacity: 1, transit: 3 },
            Edge { tail: 1, head: 2, capacity: 1, transit: 1 },
        ],
        source: 0,
        sink: 2,
        players: 4,
        priority: PriorityScheme::Local(vec![vec![], vec![0], vec![0]]),
    };
    Fig6 { instance, entry: 0, slow_exit: 1, fast_exit: 2 }
}

#[derive(Debug, Clone)]
pub struct Fig7 {
    pub instance: GameInstance,
    pub m: Time,
    /// Priority list orientation at the middle join for the exit edge:
    /// whether the direct middle edge outranks the detour edge.
    pub direct_first: bool,
    pub e_s_v1: EdgeId,
    pub e_v1_v2: EdgeId,
    pub e_v2_t: EdgeId,
    pub e_s_v5: EdgeId,
    pub e_v5_v2: EdgeId,
    pub e_v5_t: EdgeId,
    pub e_s_v3: EdgeId,
    pub e_v3_v1: EdgeId,
    pub e_v1_v4: EdgeId,
    pub e_v4_t: EdgeId,
}

pub fn fig7(m: Time, direct_first: bool) -> Result<Fig7> {
    if m <= 6 {
        return Err(Error::InvalidParameter("fig7 needs m > 6".into()));
    }
    let names = ["s", "v1", "v2", "v3", "v4", "v5", "t"];
    let (s, v1, v2, v3, v4, v5, t) = (0, 1, 2, 3, 4, 5, 6);
    let edges = vec![
        Edge { tail: s, head: v1, capacity: 1, transit: 0 },  // 0
        Edge { tail: v1, head: v2, capacity: 1, transit: 3 }, // 1
        Edge { tail: v2, head: t, capacity: 1, transit: 0 },  // 2
        Edge { tail: s, head: v5, capacity: 1, transit: 0 },  // 3
        Edge { tail: v5, head: v2, capacity: 1, transit: 4 }, // 4
        Edge { tail: v5, head: t, capacity: 1, transit: m },  // 5
        Edge { tail: s, head: v3, capacity: 1, transit: 0 },  // 6
        Edge { tail: v3, head: v1, capacity: 1, transit: 2 }, // 7
        Edge { tail: v1, head: v4, capacity: 1, transit: 0 }, // 8
        Edge { tail: v4, head: t, capacity: 1, transit: 4 },  // 9
    ];
    let mut lists = vec![Vec::new(); edges.len()];
    lists[1] = vec![0, 7];
    lists[8] = vec![0, 7];
    lists[2] = if direct_first { vec![1, 4] } else { vec![4, 1] };
    lists[4] = vec![3];
    lists[5] = vec![3];
    lists[7] = vec![6];
    lists[9] = vec![8];
    let instance = GameInstance {
        node_names: names.iter().map(|s| s.to_string()).collect(),
        edges,
        source: s,
        sink: t,
        players: 3 * m as usize + 1,
        priority: PriorityScheme::Local(lists),
    };
    Ok(Fig7 {
        instance,
        m,
        direct_first,
        e_s_v1: 0,
        e_v1_v2: 1,
        e_v2_t: 2,
        e_s_v5: 3,
        e_v5_v2: 4,
        e_v5_t: 5,
        e_s_v3: 6,
        e_v3_v1: 7,
        e_v1_v4: 8,
        e_v4_t: 9,
    })
}

#[derive(Debug, Clone)]
pub struct Fig8 {
    pub instance: GameInstance,
    pub e_s_v1: EdgeId,
    pub e_v1_v2: EdgeId,
    pub e_v2_t: EdgeId,
    pub e_v3_t: EdgeId,
    pub e_v1_t: EdgeId,
    pub e_s_v3_short: EdgeId,
    pub e_s_v3_long: EdgeId,
    pub e_v3_v2: EdgeId,
}

pub fn fig8() -> Fig8 {
    let (s, v1, v2, v3, t) = (0, 1, 2, 3, 4);
    let edges = vec![
        Edge { tail: s, head: v1, capacity: 1, transit: 1 },  // 0
        Edge { tail: v1, head: v2, capacity: 1, transit: 1 }, // 1
        Edge { tail: v2, head: t, capacity: 1, transit: 1 },  // 2
        Edge { tail: v3, head: t, capacity: 1, transit: 3 },  // 3
        Edge { tail: v1, head: t, capacity: 1, transit: 4 },  // 4
        Edge { tail: s, head: v3, capacity: 1, transit: 2 },  // 5
        Edge { tail: s, head: v3, capacity: 1, transit: 3 },  // 6
        Edge { tail: v3, head: v2, capacity: 1, transit: 1 }, // 7
    ];
    let order = (0..edges.len()).collect();
    let instance = GameInstance {
        node_names: ["s", "v1", "v2", "v3", "t"].iter().map(|s| s.to_string()).collect(),
        edges,
        source: s,
        sink: t,
        players: 9,
        priority: PriorityScheme::Global(order),
    };
    Fig8 {
        instance,
        e_s_v1: 0,
        e_v1_v2: 1,
        e_v2_t: 2,
        e_v3_t: 3,
        e_v1_t: 4,
        e_s_v3_short: 5,
        e_s_v3_long: 6,
        e_v3_v2: 7,
    }
}

/// Two crossing zero-cost cycles; the wavy cycle edges outrank the entry
/// edges, so the outcome would depend on which player is embedded first.
pub fn zero_cycle() -> GameInstance {
    let (s, v1, v2, v3, v4, t) = (0, 1, 2, 3, 4, 5);
    let edges = vec![
        Edge { tail: s, head: v1, capacity: 1, transit: 0 },  // 0
        Edge { tail: s, head: v2, capacity: 1, transit: 0 },  // 1
        Edge { tail: v1, head: v3, capacity: 1, transit: 0 }, // 2
        Edge { tail: v3, head: v2, capacity: 1, transit: 0 }, // 3
        Edge { tail: v2, head: v4, capacity: 1, transit: 0 }, // 4
        Edge { tail: v4, head: v1, capacity: 1, transit: 0 }, // 5
        Edge { tail: v3, head: t, capacity: 1, transit: 0 },  // 6
        Edge { tail: v4, head: t, capacity: 1, transit: 0 },  // 7
    ];
    let mut lists = vec![Vec::new(); edges.len()];
    lists[2] = vec![5, 0];
    lists[4] = vec![3, 1];
    lists[3] = vec![2];
    lists[6] = vec![2];
    lists[5] = vec![4];
    lists[7] = vec![4];
    GameInstance {
        node_names: ["s", "v1", "v2", "v3", "v4", "t"].iter().map(|s| s.to_string()).collect(),
        edges,
        source: s,
        sink: t,
        players: 2,
        priority: PriorityScheme::Local(lists),
    }
}

fn random_local_lists(instance: &GameInstance, rng: &mut impl Rng) -> Vec<Vec<EdgeId>> {
    (0..instance.num_edges())
        .map(|e| {
            let mut inc = instance.incoming(instance.edges[e].tail);
            inc.shuffle(rng);
            inc
        })
        .collect()
}

/// Raises transits along zero-cost shortest paths until the source-sink
/// distance is at least one.
fn bump_distance(instance: &mut GameInstance) {
    loop {
        let dist = dijkstra(instance, instance.source);
        if dist[instance.sink] >= 1 {
            return;
        }
        let e = (0..instance.num_edges())
            .find(|&e| {
                let edge = &instance.edges[e];
                edge.tail == instance.source && edge.transit == 0 && dist[edge.head] == 0
            })
            .expect("a zero-distance sink implies a zero source edge on a zero path");
        instance.edges[e].transit = 1;
    }
}

/// Random small instance: up to `max_nodes`/`max_edges`, transit 0..=3,
/// capacities 1..=3 (or all 1), guaranteed valid. Same seed, same instance.
pub fn random_instance(seed: u64, max_nodes: usize, max_edges: usize, unit_caps: bool) -> GameInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100_000 {
        let n = rng.gen_range(3..=max_nodes);
        let m = rng.gen_range(n - 1..=max_edges);
        let (source, sink) = (0, n - 1);
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let tail = rng.gen_range(0..n - 1); // anything but the sink
            let head = rng.gen_range(1..n); // anything but the source
            let transit = rng.gen_range(0..=3);
            let capacity = if unit_caps { 1 } else { rng.gen_range(1..=3) };
            edges.push(Edge { tail, head, capacity, transit });
        }
        let mut instance = GameInstance {
            node_names: (0..n).map(|i| format!("n{i}")).collect(),
            edges,
            source,
            sink,
            players: rng.gen_range(1..=3),
            priority: PriorityScheme::Local(vec![]),
        };
        instance.priority = PriorityScheme::Local(random_local_lists(&instance, &mut rng));
        if validate_instance(&instance).is_empty() {
            return instance;
        }
    }
    panic!("random instance sampling did not converge; seed {seed}");
}

/// Random two-terminal series-parallel network with unit capacities.
pub fn random_series_parallel(seed: u64, max_compositions: usize) -> GameInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Edge> = Vec::new();
    let mut next_node = 2; // 0 = source, 1 = sink of the whole network
    let ops = rng.gen_range(1..=max_compositions);
    build_sp(&mut rng, &mut edges, &mut next_node, 0, 1, ops);
    let mut instance = GameInstance {
        node_names: (0..next_node).map(|i| format!("n{i}")).collect(),
        edges,
        source: 0,
        sink: 1,
        players: rng.gen_range(2..=4),
        priority: PriorityScheme::Local(vec![]),
    };
    instance.priority = PriorityScheme::Local(random_local_lists(&instance, &mut rng));
    bump_distance(&mut instance);
    debug_assert!(validate_instance(&instance).is_empty());
    instance
}

fn build_sp(rng: &mut impl Rng, edges: &mut Vec<Edge>, next_node: &mut usize, s: usize, t: usize, budget: usize) {
    if budget == 0 || rng.gen_bool(0.3) {
        edges.push(Edge { tail: s, head: t, capacity: 1, transit: rng.gen_range(0..=3) });
        return;
    }
    let split = rng.gen_range(0..budget);
    if rng.gen_bool(0.5) {
        // series: s -> mid -> t
        let mid = *next_node;
        *next_node += 1;
        build_sp(rng, edges, next_node, s, mid, split);
        build_sp(rng, edges, next_node, mid, t, budget - 1 - split);
    } else {
        // parallel
        build_sp(rng, edges, next_node, s, t, split);
        build_sp(rng, edges, next_node, s, t, budget - 1 - split);
    }
}

/// Random outerplanar unit-capacity network: nodes on a line, all edges
/// directed forward, the spine path plus non-crossing chords.
pub fn random_outerplanar(seed: u64, max_nodes: usize) -> GameInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=max_nodes);
    let mut edges: Vec<Edge> = (0..n - 1)
        .map(|i| Edge { tail: i, head: i + 1, capacity: 1, transit: rng.gen_range(0..=2) })
        .collect();
    let mut chords: Vec<(usize, usize)> = Vec::new();
    for _ in 0..2 * n {
        let a = rng.gen_range(0..n - 2);
        let b = rng.gen_range(a + 2..n);
        let crosses = chords
            .iter()
            .any(|&(c, d)| (c < a && a < d && d < b) || (a < c && c < b && b < d));
        if !crosses && !chords.contains(&(a, b)) {
            chords.push((a, b));
            edges.push(Edge { tail: a, head: b, capacity: 1, transit: rng.gen_range(0..=2) });
        }
    }
    let mut instance = GameInstance {
        node_names: (0..n).map(|i| format!("n{i}")).collect(),
        edges,
        source: 0,
        sink: n - 1,
        players: rng.gen_range(2..=4),
        priority: PriorityScheme::Local(vec![]),
    };
    instance.priority = PriorityScheme::Local(random_local_lists(&instance, &mut rng));
    bump_distance(&mut instance);
    debug_assert!(validate_instance(&instance).is_empty());
    instance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prep::transit_shortest_paths;

    #[test]
    fn braess_counts_match_layout() {
        let g = braess(4).unwrap();
        assert_eq!(g.instance.num_nodes(), 10);
        assert_eq!(g.instance.num_edges(), 15);
        assert!(validate_instance(&g.instance).is_empty());
        let dist = transit_shortest_paths(&g.instance).unwrap();
        assert_eq!(dist[g.instance.sink], 1);
        assert_eq!(g.zigzag_walk().0.len(), 9);
    }

    #[test]
    fn braess_positive_paths_all_cost_nine() {
        let g = braess_positive(4).unwrap();
        for r in 0..4 {
            assert_eq!(g.parallel_walk(r).transit(&g.instance), 9);
        }
        assert_eq!(g.zigzag_walk().transit(&g.instance), 9);
    }

    #[test]
    fn loop_network_shape() {
        let g = loop_network(4).unwrap();
        assert_eq!(g.instance.num_nodes(), 3);
        assert_eq!(g.instance.num_edges(), 7);
        assert!(validate_instance(&g.instance).is_empty());
        assert_eq!(transit_shortest_paths(&g.instance).unwrap()[2], 2);
        assert_eq!(g.pne_walk(2).0, vec![5, 2, 1, 0]);
    }

    #[test]
    fn fig7_labels() {
        let g = fig7(7, true).unwrap();
        assert_eq!(g.instance.edges[g.e_v5_t].transit, 7);
        assert!(validate_instance(&g.instance).is_empty());
        assert_eq!(g.instance.players, 22);
        assert_eq!(transit_shortest_paths(&g.instance).unwrap()[6], 3);
    }

    #[test]
    fn zero_cycle_fails_validation() {
        let report = validate_instance(&zero_cycle());
        assert!(report
            .iter()
            .any(|v| matches!(v, crate::validate::Violation::ZeroCostCycle { .. })), "{report:?}");
    }

    #[test]
    fn named_families_validate() {
        let specs = [
            FamilySpec::Braess { b: 2 },
            FamilySpec::Braess { b: 5 },
            FamilySpec::BraessPositive { b: 4 },
            FamilySpec::PosBraess { b: 4 },
            FamilySpec::DoubleBraessLeft { b: 4 },
            FamilySpec::DoubleBraessRight { b: 4 },
            FamilySpec::Loop { k: 3 },
            FamilySpec::Loop { k: 5 },
            FamilySpec::Fig6,
            FamilySpec::Fig7 { m: 7 },
            FamilySpec::Fig8,
        ];
        for spec in specs {
            let inst = generate(spec).unwrap();
            assert!(validate_instance(&inst).is_empty(), "{spec:?}");
        }
    }

    #[test]
    fn double_braess_rows_are_walks() {
        for variant in [DoubleBraessVariant::Left, DoubleBraessVariant::Right] {
            let g = double_braess(4, variant).unwrap();
            for row in &g.row_walks {
                row.check(&g.instance, 0).unwrap();
                assert_eq!(row.transit(&g.instance), 1);
            }
        }
    }

    #[test]
    fn random_samplers_yield_valid_instances() {
        for seed in 0..20 {
            let a = random_instance(seed, 6, 10, false);
            assert!(validate_instance(&a).is_empty());
            assert_eq!(a, random_instance(seed, 6, 10, false));
            let sp = random_series_parallel(seed, 8);
            assert!(validate_instance(&sp).is_empty());
            let op = random_outerplanar(seed, 8);
            assert!(validate_instance(&op).is_empty());
        }
    }
}

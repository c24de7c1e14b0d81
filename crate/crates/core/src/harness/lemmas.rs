use num_traits::{One, Zero};

use super::{parse_topology, LemmaId, LemmaParams, Recorder, Relation};
use crate::bipartite::{
    anti_biclique_bound, bipartise, cover_from_decomposition, decompose, double_matching, planted_biclique_input,
    sseh_gadget, sseh_yes_matching,
};
use crate::blowup::{
    blow_up, blow_up_with_cap, discretize_matching, is_product_cover, minimalize_cover, total_vertex_cover_check,
    ProductVerdict,
};
use crate::error::{Error, Result};
use crate::fracmatch::{build_full, validate};
use crate::gadget::{build_gadget, cover_complement, independent_set, yes_matching, Flavor, GadgetGraph};
use crate::graph::{normalize, random_graph, verify_maximal_matching, verify_vertex_cover, Graph, Matching};
use crate::rational::{from_usize, rat, Rational};
use crate::solvers::{
    enumerate_maximal_matchings, exact_mbb, exact_min_total_vertex_cover, exact_min_vertex_cover, exact_mmm,
    greedy_maximal_matching, SolveResult, SolverOptions,
};
use crate::ulc::{generate_yes, Planted, UlcInstance, YesParams};

/// Edges above this count are not materialized for the plain maximality scan.
const SCAN_EDGE_LIMIT: usize = 2_000_000;

/// Largest base graph for which the bipartisation is solved exactly.
const EXACT_BIPARTISATION_BASE: usize = 16;

pub(super) fn run(id: LemmaId, p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    match id {
        LemmaId::Kr07Yes => kr07_yes(p, rec),
        LemmaId::WeiYes => wei_yes(p, rec),
        LemmaId::WeiNo => wei_no(p, rec),
        LemmaId::FraMat => fra_mat(p, rec),
        LemmaId::CardCompleteness => card_completeness(p, rec),
        LemmaId::CardSoundness => card_soundness(p, rec),
        LemmaId::BipCover => bip_cover(p, rec),
        LemmaId::BipSsehYes => bip_sseh_yes(p, rec),
        LemmaId::BipSsehNo => bip_sseh_no(p, rec),
        LemmaId::TotalVc => total_vc(p, rec),
    }
}

fn instance(p: &LemmaParams) -> Result<UlcInstance> {
    generate_yes(&YesParams {
        num_vars: p.num_vars,
        num_colors: p.num_colors,
        xi: p.xi.clone(),
        topology: parse_topology(&p.topology)?,
        seed: p.seed,
    })
}

fn planted(instance: &UlcInstance) -> Result<&Planted> {
    instance.planted().ok_or(Error::PlantedMissing)
}

fn options(p: &LemmaParams) -> SolverOptions {
    SolverOptions {
        node_limit: p.node_limit,
        ..SolverOptions::default()
    }
}

/// Keeps optimal results; a node-limit hit makes the run inconclusive.
fn optimal<W>(rec: &mut Recorder, what: &str, result: SolveResult<W>) -> Option<SolveResult<W>> {
    if result.is_optimal() {
        Some(result)
    } else {
        rec.stop(format!("{what}: node limit reached after {} nodes", result.nodes));
        None
    }
}

fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

fn is_maximal(graph: &Graph, matching: &Matching) -> Result<bool> {
    Ok(verify_maximal_matching(graph, matching)?.is_maximal())
}

fn plus_weight(gadget: &GadgetGraph, matching: &Matching) -> Rational {
    matching
        .edges()
        .iter()
        .map(|&(u, v)| gadget.weight(u) + gadget.weight(v))
        .sum()
}

fn kr07_yes(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let inst = instance(p)?;
    let planted = planted(&inst)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Extended)?;
    let is = independent_set(&gadget, planted)?;
    let weight = gadget.weight_of(&is.vertices);
    let share = from_usize(planted.x0.len()) / from_usize(gadget.num_vars());
    rec.check("w(IS) = |X0|/|X|·p", Relation::Eq, weight.clone(), share * gadget.p());
    let cover = cover_complement(&gadget, &is);
    rec.none(
        "IS edges (complement cover scan)",
        usize::from(verify_vertex_cover(gadget.graph(), &cover).is_err()),
    );
    rec.check(
        "|IS| = |X0|·2^(|R|-1)",
        Relation::Eq,
        from_usize(is.vertices.len()),
        from_usize(planted.x0.len() * (gadget.cloud_size() / 2)),
    );
    if p.xi.is_zero() {
        rec.check("w(IS) >= 1/2 - 2·eps", Relation::Ge, weight, rat(1, 2) - from_usize(2) * &p.epsilon);
    } else {
        rec.note("xi > 0: the 1/2 - 2·eps bound is not asserted");
    }
    Ok(())
}

fn wei_yes(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let inst = instance(p)?;
    let planted = planted(&inst)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Extended)?;
    let is = independent_set(&gadget, planted)?;
    let ym = yes_matching(&gadget, planted)?;
    ym.matching.validate(gadget.graph())?;
    let weight = plus_weight(&gadget, &ym.matching);
    if p.xi <= &p.epsilon / from_usize(2) {
        rec.check("w+(M) <= 1/2 + 2·eps", Relation::Le, weight.clone(), rat(1, 2) + from_usize(2) * &p.epsilon);
    } else {
        rec.note("xi > eps/2: the 1/2 + 2·eps bound is not asserted");
    }
    rec.check(
        "w+(M) + w(IS) = 1",
        Relation::Eq,
        &weight + gadget.weight_of(&is.vertices),
        Rational::one(),
    );
    rec.none("M extendable", usize::from(!is_maximal(gadget.graph(), &ym.matching)?));
    let matched = ym.matching.matched_mask(gadget.num_vertices());
    let wrong = (0..gadget.num_vertices()).filter(|&v| matched[v] == is.contains(v)).count();
    rec.none("vertices whose matched state disagrees with V \\ IS", wrong);
    Ok(())
}

fn wei_no(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    rec.note("surrogate: exact weighted MMM against exact weighted minimum vertex cover");
    let inst = instance(p)?;
    let planted = planted(&inst)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Base)?;
    let graph = gadget.graph();
    let edge_weights: Vec<Rational> = graph.edges().map(|(u, v)| gadget.weight(u) + gadget.weight(v)).collect();
    let vertex_weights: Vec<Rational> = (0..gadget.num_vertices()).map(|v| gadget.weight(v).clone()).collect();
    let opts = options(p);
    let Some(mmm) = optimal(rec, "weighted MMM", exact_mmm(graph, Some(&edge_weights), &opts)?) else {
        return Ok(());
    };
    let Some(vc) = optimal(rec, "weighted VC", exact_min_vertex_cover(graph, Some(&vertex_weights), &opts)?) else {
        return Ok(());
    };
    rec.check("w+(MMM) >= w(VC_min)", Relation::Ge, mmm.objective.clone(), vc.objective.clone());
    rec.check(
        "w+(MMM) = w+(witness)",
        Relation::Eq,
        mmm.objective.clone(),
        plus_weight(&gadget, &mmm.witness),
    );
    rec.none("MMM witness extendable", usize::from(!is_maximal(graph, &mmm.witness)?));
    rec.none(
        "VC witness uncovered edges",
        usize::from(verify_vertex_cover(graph, &vc.witness).is_err()),
    );
    rec.check("w(VC witness) = w(VC_min)", Relation::Eq, gadget.weight_of(&vc.witness), vc.objective.clone());
    let is = independent_set(&gadget, planted)?;
    rec.check(
        "w(VC_min) <= 1 - w(IS)",
        Relation::Le,
        vc.objective,
        Rational::one() - gadget.weight_of(&is.vertices),
    );
    Ok(())
}

fn fra_mat(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let inst = instance(p)?;
    let planted = planted(&inst)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Extended)?;
    let is = independent_set(&gadget, planted)?;
    let fm = build_full(&gadget, planted)?;
    let report = validate(&gadget, &fm);
    let outside = gadget.num_vertices() - is.vertices.len();
    let saturated_outside = report.saturation.saturated.iter().filter(|&&v| !is.contains(v)).count();
    rec.check(
        "saturated vertices outside IS = |V| - |IS|",
        Relation::Eq,
        from_usize(saturated_outside),
        from_usize(outside),
    );
    let loaded_is = is.vertices.iter().filter(|&&v| !report.saturation.loads[v].is_zero()).count();
    rec.none("IS vertices with nonzero load", loaded_is);
    rec.none("capacity violations", report.capacity_violations.len());
    rec.none("budget violations", report.budget_violations.len());
    rec.none("support edges missing from the graph", report.missing_edges.len());
    rec.none("negative edge values", report.negative_edges.len());
    Ok(())
}

fn card_completeness(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let inst = instance(p)?;
    let planted = planted(&inst)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Extended)?;
    let is = independent_set(&gadget, planted)?;
    let blowup = blow_up(&gadget, &p.rho)?;
    let fm = build_full(&gadget, planted)?;
    let cm = discretize_matching(&fm, &blowup, planted)?;
    let total = from_usize(blowup.num_vertices());
    let two_m = from_usize(2 * cm.len());
    rec.check(
        "2|M| < |V^rho|·(1/2 + 2·eps + rho)",
        Relation::Lt,
        two_m.clone(),
        &total * (rat(1, 2) + from_usize(2) * &p.epsilon + &p.rho),
    );
    let is_copies: usize = is.vertices.iter().map(|&v| blowup.copy_count(v)).sum();
    rec.check("2|M| = |V^rho| - |IS^rho|", Relation::Eq, two_m, total - from_usize(is_copies));
    let stray = cm
        .matching
        .edges()
        .iter()
        .zip(&cm.base_edges)
        .filter(|(&(a, b), &base)| {
            let (u, v) = (blowup.project(a).base, blowup.project(b).base);
            normalize(u, v) != base || fm.value(u, v).is_zero() || !gadget.graph().has_edge(u, v)
        })
        .count();
    rec.none("copy edges off the fractional support", stray);
    rec.none("M extendable (twin scan)", usize::from(!blowup.verify_maximal(&cm.matching)?.is_maximal()));
    if blowup.num_edges() <= SCAN_EDGE_LIMIT {
        let graph = blowup.to_graph()?;
        cm.matching.validate(&graph)?;
        rec.none("M extendable (edge scan)", usize::from(!is_maximal(&graph, &cm.matching)?));
        rec.none(
            "matched set fails total vertex cover",
            usize::from(!total_vertex_cover_check(&graph, &cm.matching.matched_vertices())),
        );
    } else {
        rec.note("blowup too large for the plain edge scan; twin scan only");
    }
    Ok(())
}

fn card_soundness(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    rec.note("surrogate: minimal covers of maximal matchings are product covers and 2|M| >= VC_min");
    let inst = instance(p)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Base)?;
    let blowup = blow_up_with_cap(&gadget, &p.rho, p.soundness_cap)?;
    let graph = blowup.to_graph()?;
    let opts = options(p);
    let Some(vc) = optimal(rec, "blowup VC", exact_min_vertex_cover(&graph, None, &opts)?) else {
        return Ok(());
    };
    let Some(mmm) = optimal(rec, "blowup MMM", exact_mmm(&graph, None, &opts)?) else {
        return Ok(());
    };
    let matchings = match enumerate_maximal_matchings(&graph, p.enumeration_limit) {
        Ok(all) => {
            rec.note(format!("exhaustive over {} maximal matchings", all.len()));
            let least = all.iter().map(Matching::len).min().unwrap_or(0);
            rec.check("min enumerated |M| = exact MMM", Relation::Eq, from_usize(least), mmm.objective.clone());
            all
        }
        Err(Error::BudgetExhausted { .. }) => {
            rec.note(format!(
                "more than {} maximal matchings; sampled {} greedy ones plus the exact optimum",
                p.enumeration_limit, p.samples
            ));
            let mut some: Vec<Matching> = (0..p.samples)
                .map(|i| greedy_maximal_matching(&graph, sample_seed(p.seed, i)))
                .collect();
            some.push(mmm.witness.clone());
            some
        }
        Err(e) => return Err(e),
    };
    let dropped: Vec<usize> = (0..gadget.num_vertices()).filter(|&v| blowup.copy_count(v) == 0).collect();
    let total = from_usize(blowup.num_vertices());
    let mut mixed = 0;
    let mut extendable = 0;
    let mut worst_gap: Option<Rational> = None;
    for m in &matchings {
        extendable += usize::from(!is_maximal(&graph, m)?);
        let minimal = minimalize_cover(&graph, &m.matched_vertices())?;
        match is_product_cover(&blowup, &minimal) {
            ProductVerdict::Mixed { .. } => mixed += 1,
            ProductVerdict::Product(base) => {
                let mut c_w = base;
                c_w.extend(&dropped);
                c_w.sort_unstable();
                if verify_vertex_cover(gadget.graph(), &c_w).is_err() {
                    return Err(Error::Internal("projected product cover misses a base edge".into()));
                }
                let gap = gadget.weight_of(&c_w) - from_usize(minimal.len()) / &total;
                if worst_gap.as_ref().is_none_or(|w| gap > *w) {
                    worst_gap = Some(gap);
                }
            }
        }
    }
    rec.none("minimal covers that are not product covers", mixed);
    rec.none("checked matchings that are extendable", extendable);
    rec.check(
        "2·MMM(G^rho) >= VC_min(G^rho)",
        Relation::Ge,
        from_usize(2) * &mmm.objective,
        vc.objective.clone(),
    );
    if let Some(gap) = worst_gap {
        rec.check("max over M of w(C_w) - |C_-|/|V^rho| < rho", Relation::Lt, gap, p.rho.clone());
    }
    Ok(())
}

fn bip_cover(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let base = random_graph(p.size, 1, 2, p.seed);
    let bip = bipartise(&base);
    let mut short_paths = 0;
    let mut not_maximal = 0;
    let mut worst_ratio: Option<Rational> = None;
    for i in 0..p.samples {
        let m = greedy_maximal_matching(bip.graph(), sample_seed(p.seed, i));
        not_maximal += usize::from(!is_maximal(bip.graph(), &m)?);
        let decomposition = decompose(&bip, &m)?;
        short_paths += decomposition.paths.iter().filter(|path| path.len() < 3).count();
        let cover = cover_from_decomposition(&bip, &decomposition)?;
        if verify_vertex_cover(&base, &cover).is_err() {
            return Err(Error::Internal("decomposition cover misses a base edge".into()));
        }
        let ratio = from_usize(2 * cover.len());
        let ratio = if m.is_empty() { ratio } else { ratio / from_usize(2 * m.len()) };
        if worst_ratio.as_ref().is_none_or(|w| ratio > *w) {
            worst_ratio = Some(ratio);
        }
    }
    rec.note(format!("{} sampled maximal matchings of the bipartisation", p.samples));
    if let Some(ratio) = worst_ratio {
        rec.check("max |C|/|M|", Relation::Le, ratio, rat(3, 2));
    }
    rec.none("decomposition paths with fewer than 2 arcs", short_paths);
    rec.none("sampled matchings that are extendable", not_maximal);

    let base_matching = greedy_maximal_matching(&base, p.seed);
    let doubled = double_matching(&bip, &base_matching)?;
    rec.check(
        "|doubled M| = 2|M|",
        Relation::Eq,
        from_usize(doubled.len()),
        from_usize(2 * base_matching.len()),
    );
    rec.none("doubled maximal matching extendable", usize::from(!is_maximal(bip.graph(), &doubled)?));

    if p.size <= EXACT_BIPARTISATION_BASE {
        let opts = options(p);
        let Some(mmm) = optimal(rec, "bipartisation MMM", exact_mmm(bip.graph(), None, &opts)?) else {
            return Ok(());
        };
        let Some(vc) = optimal(rec, "base VC", exact_min_vertex_cover(&base, None, &opts)?) else {
            return Ok(());
        };
        rec.check("MMM(H) >= 2/3·VC_min(G)", Relation::Ge, mmm.objective, rat(2, 3) * vc.objective);
    } else {
        rec.note("base graph too large for the exact comparison");
    }
    Ok(())
}

fn planted_size(p: &LemmaParams) -> Result<usize> {
    let k = (rat(1, 2) - &p.epsilon) * from_usize(p.size);
    if !k.is_integer() || k < Rational::zero() {
        return Err(Error::InvalidParameter(format!("(1/2 - eps)·n = {k} is not a whole size")));
    }
    crate::rational::to_usize(&k.to_integer())
}

fn bip_sseh_yes(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let k = planted_size(p)?;
    let (input, k_a, k_b) = planted_biclique_input(p.size, k, 1, 2, p.seed)?;
    let gadget = sseh_gadget(&input, &p.epsilon)?;
    let m = sseh_yes_matching(&gadget, &k_a, &k_b)?;
    m.validate(gadget.graph())?;
    rec.check(
        "|M| = n(1 + 2·eps)",
        Relation::Eq,
        from_usize(m.len()),
        from_usize(p.size) * (Rational::one() + from_usize(2) * &p.epsilon),
    );
    rec.none("M extendable", usize::from(!is_maximal(gadget.graph(), &m)?));
    let matched = m.matched_mask(gadget.graph().num_vertices());
    let unmatched: Vec<usize> = (0..matched.len()).filter(|&v| !matched[v]).collect();
    let leaked = unmatched
        .iter()
        .flat_map(|&u| unmatched.iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| u < v && gadget.graph().has_edge(u, v))
        .count();
    rec.none("edges inside the unmatched set", leaked);
    Ok(())
}

fn bip_sseh_no(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    rec.note("surrogate: exact MMM of the padded complement against the exact biclique bound");
    let k = planted_size(p)?;
    let (input, k_a, k_b) = planted_biclique_input(p.size, k, 1, 2, p.seed)?;
    let gadget = sseh_gadget(&input, &p.epsilon)?;
    let opts = options(p);
    let Some(mbb) = optimal(rec, "input MBB", exact_mbb(input.graph(), &input.left(), &input.right(), &opts)?) else {
        return Ok(());
    };
    let Some(mmm) = optimal(rec, "gadget MMM", exact_mmm(gadget.graph(), None, &opts)?) else {
        return Ok(());
    };
    let (left, right) = &mbb.witness;
    let biclique_edges = left.iter().flat_map(|&a| right.iter().map(move |&b| (a, b)));
    let missing = biclique_edges.filter(|&(a, b)| !input.graph().has_edge(a, b)).count();
    rec.none("MBB witness non-edges", missing);
    let mbb_size = crate::rational::to_usize(&mbb.objective.to_integer())?;
    rec.check(
        "MMM(G') >= anti-biclique bound",
        Relation::Ge,
        mmm.objective.clone(),
        from_usize(anti_biclique_bound(&gadget, mbb_size)),
    );
    rec.check("MBB(G) >= planted size", Relation::Ge, mbb.objective.clone(), from_usize(k));
    let yes = sseh_yes_matching(&gadget, &k_a, &k_b)?;
    rec.check("MMM(G') <= |planted matching|", Relation::Le, mmm.objective.clone(), from_usize(yes.len()));
    rec.none("MMM witness extendable", usize::from(!is_maximal(gadget.graph(), &mmm.witness)?));
    if mbb.objective < &p.epsilon * from_usize(p.size) {
        rec.check(
            "MMM(G') >= n(3/2 - eps)",
            Relation::Ge,
            mmm.objective,
            from_usize(p.size) * (rat(3, 2) - &p.epsilon),
        );
    } else {
        rec.note("input has a biclique of side >= eps·n; the NO-side size bound does not apply");
    }
    Ok(())
}

fn total_vc(p: &LemmaParams, rec: &mut Recorder) -> Result<()> {
    let graph = random_graph(p.size, 1, 2, p.seed);
    let opts = options(p);
    let tvc = exact_min_total_vertex_cover(&graph)?;
    let Some(vc) = optimal(rec, "VC", exact_min_vertex_cover(&graph, None, &opts)?) else {
        return Ok(());
    };
    rec.check("TVC_min >= VC_min", Relation::Ge, tvc.objective.clone(), vc.objective);
    rec.none(
        "TVC witness fails the total cover check",
        usize::from(!total_vertex_cover_check(&graph, &tvc.witness)),
    );
    let failing = (0..p.samples)
        .map(|i| greedy_maximal_matching(&graph, sample_seed(p.seed, i)))
        .filter(|m| !total_vertex_cover_check(&graph, &m.matched_vertices()))
        .count();
    rec.none("greedy matched sets failing the total cover check", failing);

    let inst = instance(p)?;
    let planted = planted(&inst)?;
    let gadget = build_gadget(&inst, &p.epsilon, Flavor::Extended)?;
    let blowup = blow_up(&gadget, &p.rho)?;
    let cm = discretize_matching(&build_full(&gadget, planted)?, &blowup, planted)?;
    if blowup.num_edges() <= SCAN_EDGE_LIMIT {
        let bg = blowup.to_graph()?;
        rec.none(
            "discretized matched set fails the total cover check",
            usize::from(!total_vertex_cover_check(&bg, &cm.matching.matched_vertices())),
        );
    } else {
        rec.note("blowup too large to materialize for the total cover check");
    }
    Ok(())
}

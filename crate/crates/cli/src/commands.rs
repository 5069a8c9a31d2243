use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use huemap_core::compare::{
    apply_overrides, build_contingency, cvpai2, harmonize, read_overrides, translate_legend,
    ContingencyTable, LegendCrosswalk, LegendRelation,
};
use huemap_core::evidence::{combine, read_evidence_csv};
use huemap_core::naming::{
    aggregate as aggregate_map, classify as classify_image, classify_streamed, LegendAggregation,
};
use huemap_core::raster::synthetic::SyntheticScene;
use huemap_core::raster::{read_image, write_image, FileStripSource};
use huemap_core::rules::{
    format_rules as format_rule_text, parse_rules, specl, specl_printed_row8,
};
use huemap_core::segment::{
    build_superpixel_table, classify_and_segment_streamed, connected_components, cross_aura,
    reconstruct, reconstruct_streamed, rmse_map, segment_streamed, write_superpixel_csv,
    StreamOptions,
};
use huemap_core::{Adjacency, CategoricalMap, MatchPolicy, RuleSet};
use serde_json::json;

use crate::manifest::Manifest;
use crate::{
    AggregateArgs, ClassifyArgs, CliError, CompareArgs, EvidenceArgs, RuleSource, SegmentArgs,
    SynthArgs, TranslateArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{}: no such file", path.display())))
    }
}

fn read_text(path: &Path) -> Result<String> {
    require_file(path)?;
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<File> {
    require_file(path)?;
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn make_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn load_rules(src: &RuleSource, manifest: &mut Manifest) -> Result<RuleSet> {
    let mut rules = match &src.rules {
        Some(_) if src.specl_printed_row8 => {
            return Err(CliError::Usage(
                "--specl-printed-row8 applies only to the built-in rule set".into(),
            ))
        }
        Some(path) => {
            let text = read_text(path)?;
            manifest.input(path);
            parse_rules(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None if src.specl_printed_row8 => specl_printed_row8(),
        None => specl(),
    };
    if let Some(p) = &src.policy {
        let policy: MatchPolicy = p.parse().map_err(CliError::Usage)?;
        rules = rules.with_policy(policy);
    }
    Ok(rules)
}

fn parse_adjacency(s: &str) -> Result<Adjacency> {
    Ok(Adjacency::parse(s)?)
}

fn check_strip(n: Option<usize>) -> Result<()> {
    if n == Some(0) {
        return Err(CliError::Usage("--stream needs at least one row".into()));
    }
    Ok(())
}

pub fn classify(a: &ClassifyArgs) -> Result<()> {
    check_strip(a.stream)?;
    let mut manifest = Manifest::new("classify", a);
    let rules = load_rules(&a.rules, &mut manifest)?;
    require_file(&a.input)?;
    manifest.input_raster(&a.input);
    let map = match a.stream {
        Some(n) => {
            let mut src = FileStripSource::open(&a.input, None)?;
            classify_streamed(&mut src, &rules, n, None)?
        }
        None => classify_image(&read_image(&a.input)?, &rules)?,
    };
    map.write(&a.out)?;
    manifest.output_raster(&a.out);
    manifest.write(&manifest_path(&a.out))?;
    println!(
        "classified {} valid pixels of {}x{} into {} classes ({})",
        map.valid_count(),
        map.width(),
        map.height(),
        map.cardinality(),
        rules.policy.name()
    );
    Ok(())
}

pub fn segment(a: &SegmentArgs) -> Result<()> {
    check_strip(a.stream)?;
    let ccl = parse_adjacency(&a.adjacency)?;
    let aura_adj = parse_adjacency(&a.aura_adjacency)?;
    let mut manifest = Manifest::new("segment", a);
    require_file(&a.input)?;
    manifest.input_raster(&a.input);
    let given_map = match &a.map {
        Some(p) => {
            require_file(p)?;
            manifest.input_raster(p);
            Some(CategoricalMap::read(p)?)
        }
        None => None,
    };
    let rules = if given_map.is_none() {
        Some(load_rules(&a.rules, &mut manifest)?)
    } else {
        None
    };
    make_dir(&a.out_dir)?;

    let (map, seg, aura, table, bands, recon, rmse) = match a.stream {
        Some(n) => {
            let opts = StreamOptions {
                strip_height: n,
                ccl,
                aura: aura_adj,
            };
            let mut src = FileStripSource::open(&a.input, None)?;
            let out = match (&given_map, &rules) {
                (Some(m), _) => segment_streamed(m, &mut src, opts, None)?,
                (None, Some(r)) => classify_and_segment_streamed(&mut src, r, opts, None)?,
                (None, None) => unreachable!("rules are loaded when no map is given"),
            };
            let bands = huemap_core::raster::StripSource::bands(&src).to_vec();
            let mut src = FileStripSource::open(&a.input, None)?;
            let (recon, rmse) =
                reconstruct_streamed(&out.segmentation, &out.table, &mut src, n, None)?;
            (
                out.map,
                out.segmentation,
                out.aura,
                out.table,
                bands,
                recon,
                rmse,
            )
        }
        None => {
            let image = read_image(&a.input)?;
            let map = match (given_map, &rules) {
                (Some(m), _) => m,
                (None, Some(r)) => classify_image(&image, r)?,
                (None, None) => unreachable!("rules are loaded when no map is given"),
            };
            let seg = connected_components(&map, ccl);
            let aura = cross_aura(&map, aura_adj);
            let table = build_superpixel_table(&map, &seg, &image, &aura)?;
            let recon = reconstruct(&seg, &table, &image)?;
            let rmse = rmse_map(&image, &recon)?;
            (map, seg, aura, table, image.bands().to_vec(), recon, rmse)
        }
    };

    let out = |name: &str| a.out_dir.join(name);
    if a.map.is_none() {
        map.write(out("map.hdr"))?;
        manifest.output_raster(&out("map.hdr"));
    }
    seg.write(out("segments.hdr"), ccl)?;
    manifest.output_raster(&out("segments.hdr"));
    aura.write(out("aura.hdr"))?;
    manifest.output_raster(&out("aura.hdr"));
    let csv_path = out("superpixels.csv");
    write_superpixel_csv(&table, &bands, create(&csv_path)?)?;
    manifest.output(&csv_path);
    write_image(&recon, out("reconstruction.hdr"))?;
    manifest.output_raster(&out("reconstruction.hdr"));
    rmse.write(out("rmse.hdr"))?;
    manifest.output_raster(&out("rmse.hdr"));

    let stats = rmse.stats();
    let summary = json!({
        "width": seg.width(),
        "height": seg.height(),
        "segments": seg.segment_count(),
        "valid_pixels": map.valid_count(),
        "adjacency": ccl.count(),
        "aura_adjacency": aura_adj.count(),
        "aura_total": aura.total(),
        "rmse": {
            "pixels": stats.pixels,
            "min": stats.min,
            "max": stats.max,
            "mean": stats.mean,
            "stdev": stats.stdev,
        },
    });
    let summary_path = out("summary.json");
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("json") + "\n",
    )
    .map_err(|e| CliError::io(&summary_path, e))?;
    manifest.output(&summary_path);
    manifest.write(&out("manifest.json"))?;

    if a.json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    } else {
        println!("segments: {}", seg.segment_count());
        println!("valid pixels: {}", map.valid_count());
        println!("cross-aura total: {}", aura.total());
        println!(
            "RMSE: Min = {:.6}, Max = {:.6}, Mean = {:.6}, Stdev = {:.6}",
            stats.min, stats.max, stats.mean, stats.stdev
        );
    }

    let covered: u64 = table.iter().map(|r| r.pixel_count).sum();
    if covered != map.valid_count() as u64 {
        return Err(CliError::Invariant(format!(
            "segments cover {covered} pixels, map has {} valid",
            map.valid_count()
        )));
    }
    if aura.total() % 2 != 0 {
        return Err(CliError::Invariant("cross-aura total is odd".into()));
    }
    if table.len() != seg.segment_count() as usize {
        return Err(CliError::Invariant(
            "superpixel table and segment count disagree".into(),
        ));
    }
    Ok(())
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let mut manifest = Manifest::new("compare", a);
    let table = match (&a.counts, &a.test, &a.reference) {
        (Some(c), _, _) => {
            let f = open(c)?;
            manifest.input(c);
            ContingencyTable::read_csv(f)?
        }
        (None, Some(t), Some(r)) => {
            require_file(t)?;
            require_file(r)?;
            manifest.input_raster(t);
            manifest.input_raster(r);
            build_contingency(&CategoricalMap::read(t)?, &CategoricalMap::read(r)?)?
        }
        _ => {
            return Err(CliError::Usage(
                "give --counts or both --test and --reference".into(),
            ))
        }
    };
    let overrides = match &a.overrides {
        Some(p) => {
            let f = open(p)?;
            manifest.input(p);
            read_overrides(f)?
        }
        None => Vec::new(),
    };
    let trace = harmonize(&table, a.th1, a.th2)?;
    let (relation, audit) = apply_overrides(&trace, &overrides)?;
    let value = cvpai2(&relation);

    make_dir(&a.out_dir)?;
    let out = |name: &str| a.out_dir.join(name);
    let (rows, cols) = (table.test_names(), table.reference_names());
    let mut written = Vec::new();
    let mut emit =
        |name: &str, f: &dyn Fn(BufWriter<File>) -> huemap_core::Result<()>| -> Result<()> {
            let p = out(name);
            f(create(&p)?)?;
            written.push(p);
            Ok(())
        };
    emit("step1_counts.csv", &|w| table.write_csv(w))?;
    emit("step2_joint.csv", &|w| trace.joint.write_csv(rows, cols, w))?;
    emit("step3_reference_given_test.csv", &|w| {
        trace.reference_given_test.write_csv(rows, cols, w)
    })?;
    emit("step4_reference_given_test_th1.csv", &|w| {
        trace.reference_given_test_crisp.write_csv(w)
    })?;
    emit("step5_test_given_reference.csv", &|w| {
        trace.test_given_reference.write_csv(rows, cols, w)
    })?;
    emit("step6_test_given_reference_th2.csv", &|w| {
        trace.test_given_reference_crisp.write_csv(w)
    })?;
    emit("step7_combined.csv", &|w| trace.combined.write_csv(w))?;
    emit("step8_relation.csv", &|w| relation.write_csv(w))?;

    let audit_path = out("audit.csv");
    {
        let mut w = create(&audit_path)?;
        writeln!(w, "test_label,reference_label,previous,value,note")
            .map_err(|e| CliError::io(&audit_path, e))?;
        for e in &audit {
            writeln!(
                w,
                "{},{},{},{},\"{}\"",
                e.test,
                e.reference,
                e.previous,
                e.value,
                e.note.replace('"', "\"\"")
            )
            .map_err(|e| CliError::io(&audit_path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&audit_path, e))?;
    }
    written.push(audit_path);

    let report = json!({
        "cvpai2": value,
        "tc": relation.tc(),
        "rc": relation.rc(),
        "ce": relation.ce(),
        "th1": a.th1,
        "th2": a.th2,
        "total": table.total(),
        "test_dictionary": rows,
        "reference_dictionary": cols,
        "relation": (0..relation.tc())
            .map(|t| (0..relation.rc()).map(|r| relation.get(t, r)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "audit": audit.iter().map(|e| json!({
            "test": e.test,
            "reference": e.reference,
            "previous": e.previous,
            "value": e.value,
            "note": e.note,
        })).collect::<Vec<_>>(),
    });
    let mut text = String::new();
    text.push_str(&format!("CVPAI2 = {value:.6}\n"));
    text.push_str(&format!(
        "TC = {}, RC = {}, CE = {}, N = {}\n",
        relation.tc(),
        relation.rc(),
        relation.ce(),
        table.total()
    ));
    text.push_str(&format!("TH1 = {}, TH2 = {}\n", a.th1, a.th2));
    text.push_str(&format!("overrides: {}\n", audit.len()));
    for e in &audit {
        text.push_str(&format!(
            "  ({}, {}): {} -> {}  note: {}\n",
            e.test, e.reference, e.previous, e.value, e.note
        ));
    }
    let json_path = out("report.json");
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&report).expect("json") + "\n",
    )
    .map_err(|e| CliError::io(&json_path, e))?;
    let txt_path = out("report.txt");
    fs::write(&txt_path, &text).map_err(|e| CliError::io(&txt_path, e))?;
    written.push(json_path);
    written.push(txt_path);
    for p in &written {
        manifest.output(p);
    }
    manifest.write(&out("manifest.json"))?;

    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    } else {
        print!("{text}");
    }

    let joint: f64 = trace.joint.values().iter().sum();
    if (joint - 1.0).abs() > 1e-12 {
        return Err(CliError::Invariant(format!(
            "joint probabilities sum to {joint}"
        )));
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(CliError::Invariant(format!(
            "CVPAI2 = {value} is outside [0, 1]"
        )));
    }
    Ok(())
}

pub fn evidence(a: &EvidenceArgs) -> Result<()> {
    let mut manifest = Manifest::new("evidence", a);
    let relation = LegendRelation::read_csv(open(&a.relation)?)?;
    manifest.input(&a.relation);
    let objects = read_evidence_csv(open(&a.evidence)?, &relation)?;
    manifest.input(&a.evidence);
    let mut w = create(&a.out)?;
    let io = |e| CliError::io(&a.out, e);
    write!(w, "object_id,color_name").map_err(io)?;
    for c in relation.reference_names() {
        write!(w, ",{c}").map_err(io)?;
    }
    writeln!(w, ",best").map_err(io)?;
    let mut report = Vec::new();
    for (id, ev) in &objects {
        let scores = combine(ev, &relation)?;
        let best = scores
            .best()
            .map(|(c, _)| c.to_string())
            .unwrap_or_default();
        write!(w, "{id},{}", ev.color_name).map_err(io)?;
        for s in scores.scores() {
            write!(w, ",{s}").map_err(io)?;
        }
        writeln!(w, ",{best}").map_err(io)?;
        report.push(json!({ "object_id": id, "color_name": ev.color_name, "scores": scores.scores(), "best": best }));
        if !a.json {
            println!("{id}: {best}");
        }
    }
    w.flush().map_err(io)?;
    manifest.output(&a.out);
    manifest.write(&manifest_path(&a.out))?;
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(
                &json!({ "classes": relation.reference_names(), "objects": report })
            )
            .expect("json")
        );
    }
    Ok(())
}

pub fn aggregate(a: &AggregateArgs) -> Result<()> {
    let mut manifest = Manifest::new("aggregate", a);
    require_file(&a.map)?;
    manifest.input_raster(&a.map);
    let map = CategoricalMap::read(&a.map)?;
    let agg = LegendAggregation::from_csv(open(&a.mapping)?, map.legend())?;
    manifest.input(&a.mapping);
    let out = aggregate_map(&map, &agg)?;
    out.write(&a.out)?;
    manifest.output_raster(&a.out);
    manifest.write(&manifest_path(&a.out))?;
    println!(
        "{} classes aggregated into {}",
        map.cardinality(),
        out.cardinality()
    );
    Ok(())
}

pub fn translate(a: &TranslateArgs) -> Result<()> {
    let mut manifest = Manifest::new("translate", a);
    require_file(&a.map)?;
    manifest.input_raster(&a.map);
    let map = CategoricalMap::read(&a.map)?;
    let crosswalk = match &a.crosswalk {
        Some(p) => {
            manifest.input(p);
            LegendCrosswalk::from_csv(open(p)?)?
        }
        None => LegendCrosswalk::nlcd_lccs_dp(),
    };
    let resolution = match &a.resolution {
        Some(p) => {
            manifest.input(p);
            Some(LegendCrosswalk::read_resolution(open(p)?)?)
        }
        None => None,
    };
    let out = translate_legend(&map, &crosswalk, resolution.as_ref())?;
    out.write(&a.out)?;
    manifest.output_raster(&a.out);
    manifest.write(&manifest_path(&a.out))?;
    println!(
        "{} codes translated into {} classes",
        map.cardinality(),
        out.cardinality()
    );
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    if a.width == 0 || a.height == 0 || a.block == 0 {
        return Err(CliError::Usage(
            "width, height and block must be positive".into(),
        ));
    }
    let image = SyntheticScene::new(a.width, a.height, a.seed)
        .with_block(a.block)
        .to_image()?;
    write_image(&image, &a.out)?;
    let mut manifest = Manifest::new("synth", a);
    manifest.output_raster(&a.out);
    manifest.write(&manifest_path(&a.out))?;
    println!(
        "wrote {}x{} scene with {} bands",
        a.width,
        a.height,
        image.band_count()
    );
    Ok(())
}

pub fn format_rules(a: &RuleSource) -> Result<()> {
    let mut manifest = Manifest::new("format-rules", a);
    let rules = load_rules(a, &mut manifest)?;
    print!("{}", format_rule_text(&rules));
    Ok(())
}

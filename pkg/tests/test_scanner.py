"""Scanner decision rules, aggregation, modes and invariance properties."""

import json

import pytest

from jarscan.classfile import (
    ClassModel,
    MethodModel,
    class_entry_path,
    default_constructor,
    emit_class,
    parse_class,
    strip_packages,
    write_jar,
)
from jarscan.cpg import FixSignature, Triplet
from jarscan.kb import ConstructRecord, KnowledgeBase, build_entry, class_member_context
from jarscan.classfile.constructs import ConstructId
from jarscan.modharness import modify
from jarscan.scanner import (
    FIXED,
    NOT_FLAGGED,
    SKIPPED,
    VULNERABLE,
    ConstructVerdict,
    ScanConfig,
    aggregate,
    match_class_context,
    match_triplets,
    report_to_json,
    retrieve_dependencies,
    scan,
    scan_jar_bytes,
)


def T(*names):
    return frozenset(Triplet(n, "CFG", n) for n in names)


def _verdict(v):
    return ConstructVerdict(fqn="x", kind="method", change="changed",
                            cve_id="CVE", verdict=v, mode="default")


# ------------------------------------------------------------ match_triplets

def test_nt_majority_vulnerable():
    sig = FixSignature(ct=T(), pt=T("p1", "p2", "p3"), nt=T("n1", "n2"))
    tm = T("n1", "n2", "p1")     # |NT∩Tm|=2 >= |PT∩Tm|=1
    v, counts = match_triplets(tm, sig, ScanConfig())
    assert v == VULNERABLE
    assert counts.nt_hit == 2 and counts.pt_hit == 1


def test_nt_equality_is_vulnerable():
    sig = FixSignature(ct=T(), pt=T("p1", "p2"), nt=T("n1", "n2"))
    tm = T("n1", "n2", "p1", "p2")   # 2 >= 2
    v, _ = match_triplets(tm, sig, ScanConfig())
    assert v == VULNERABLE


def test_exact_post_fix_method_is_fixed():
    ct, pt = T("c1", "c2"), T("p1")
    sig = FixSignature(ct=ct, pt=pt, nt=T("n1"))
    tm = ct | pt                     # the fixed body
    v, counts = match_triplets(tm, sig, ScanConfig())
    assert v == FIXED
    assert counts.nt_hit == 0 and counts.pt_hit == 1


def test_nt_empty_ratio_below_threshold_vulnerable():
    sig = FixSignature(ct=T("c"), pt=T("p1", "p2", "p3", "p4"), nt=T())
    tm = T("c", "p1")                # ratio 0.25 < 0.5
    v, counts = match_triplets(tm, sig, ScanConfig())
    assert v == VULNERABLE
    assert counts.pt_hit == 1 and counts.pt_size == 4


def test_nt_empty_ratio_exactly_half_is_fixed():
    sig = FixSignature(ct=T("c"), pt=T("p1", "p2", "p3", "p4"), nt=T())
    tm = T("c", "p1", "p2")          # ratio 0.5 >= 0.5
    v, _ = match_triplets(tm, sig, ScanConfig())
    assert v == FIXED


def test_repack_ct_gate_fails_closed():
    sig = FixSignature(ct=T("c1", "c2", "c3", "c4"), pt=T(), nt=T("n1"))
    tm = T("n1", "c1")               # ct ratio 0.25 <= 0.3: gate not passed
    v, _ = match_triplets(tm, sig, ScanConfig(), mode="repack")
    assert v == FIXED


def test_repack_ct_gate_passes_then_matches():
    sig = FixSignature(ct=T("c1", "c2", "c3"), pt=T(), nt=T("n1"))
    tm = T("n1", "c1", "c2")         # ct ratio 2/3 > 0.3, NT hit
    v, _ = match_triplets(tm, sig, ScanConfig(), mode="repack")
    assert v == VULNERABLE


def test_repack_empty_ct_fails_closed():
    sig = FixSignature(ct=T(), pt=T("p"), nt=T("n"))
    tm = T("n")
    v, _ = match_triplets(tm, sig, ScanConfig(), mode="repack")
    assert v == FIXED


def test_repack_unqualifies_both_sides():
    sig = FixSignature(
        ct=frozenset({Triplet("new a.b.X", "CFG", "goto")}),
        pt=frozenset(),
        nt=frozenset({Triplet("invoke_virtual a.b.X#evil():int(%)", "CFG", "goto")}),
    )
    tm = frozenset({
        Triplet("new r.a.b.X", "CFG", "goto"),
        Triplet("invoke_virtual r.a.b.X#evil():int(%)", "CFG", "goto"),
    })
    v, counts = match_triplets(tm, sig, ScanConfig(), mode="repack")
    assert v == VULNERABLE
    assert counts.ct_hit == 1 and counts.nt_hit == 1


# ------------------------------------------------------- class context gate

def _context_class(members):
    methods = [default_constructor()] + [
        MethodModel(n, "(I)I", 0x09, code=["iload_0", "ireturn"]) for n in members]
    return parse_class(emit_class(ClassModel("p.C", methods=methods)))


def test_class_context_identical_class_full_ratio():
    cf = _context_class(["m1", "m2", "m3"])
    ctx = class_member_context(cf)
    assert match_class_context(ctx, cf) == 1.0


def test_class_context_disjoint_zero():
    cf = _context_class(["m1", "m2"])
    other = _context_class([])
    other_ctx = frozenset({"Z: int zz(int)"})
    assert match_class_context(other_ctx, cf) == 0.0


def test_class_context_one_of_three_accepted_at_default():
    scanned = _context_class(["m1"])
    kb_ctx = frozenset({
        "C: int m1(int)", "C: int gone(int)", "C: int gone2(int)"})
    ratio = match_class_context(kb_ctx, scanned)
    assert ratio == pytest.approx(1 / 3)
    assert ratio > ScanConfig().theta_cc


def test_class_context_empty_rejected():
    assert match_class_context(frozenset(), _context_class(["m"])) == 0.0


# ----------------------------------------------------------------- aggregate

def test_aggregate_majority_vulnerable():
    assert aggregate([_verdict(VULNERABLE)] * 2 + [_verdict(FIXED)]) == VULNERABLE


def test_aggregate_tie_is_vulnerable():
    assert aggregate([_verdict(VULNERABLE), _verdict(FIXED)]) == VULNERABLE


def test_aggregate_fixed_majority_not_flagged():
    assert aggregate([_verdict(FIXED)] * 3) == NOT_FLAGGED


def test_aggregate_skipped_do_not_vote():
    votes = [_verdict(SKIPPED), _verdict(SKIPPED), _verdict(VULNERABLE),
             _verdict(FIXED), _verdict(FIXED)]
    assert aggregate(votes) == NOT_FLAGGED
    assert aggregate([_verdict(SKIPPED), _verdict(VULNERABLE)]) == VULNERABLE


def test_aggregate_all_skipped_not_flagged():
    assert aggregate([_verdict(SKIPPED)] * 3) == NOT_FLAGGED


# ------------------------------------------------------- retrieve dependencies

def test_retrieve_empty_dir(tmp_path):
    assert retrieve_dependencies(directory=tmp_path) == []


def test_retrieve_dir_with_jars(tmp_path):
    for name in ("a.jar", "b.jar", "sub/c.jar"):
        p = tmp_path / name
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(b"x")
    (tmp_path / "notajar.txt").write_text("no")
    paths = retrieve_dependencies(directory=tmp_path)
    assert [p.rsplit("/", 1)[-1] for p in paths] == ["a.jar", "b.jar", "c.jar"]


def test_retrieve_command_mode(tmp_path):
    a, b = tmp_path / "x.jar", tmp_path / "y.jar"
    a.write_bytes(b"x")
    b.write_bytes(b"y")
    paths = retrieve_dependencies(command=f"printf '{a}\\n{b}\\n'")
    assert paths == [str(a), str(b)]


def test_retrieve_deduplicates(tmp_path):
    a = tmp_path / "x.jar"
    a.write_bytes(b"x")
    assert retrieve_dependencies(paths=[a, a, str(a)]) == [str(a)]


# -------------------------------------------------------------- construct rules

def _kb_one(record):
    return KnowledgeBase(records={"CVE-R": [record]})


def _jar_with(*models):
    return write_jar([(class_entry_path(m.name), emit_class(m)) for m in models])


def _record(kind, fqn, change, context=(), signature=None):
    return ConstructRecord(
        construct=ConstructId(kind, fqn, strip_packages(fqn)),
        change=change, signature=signature, class_context=frozenset(context))


def _scan_one(jar, kb, modes=("default",)):
    return scan_jar_bytes("test.jar", jar, kb, ScanConfig(modes=modes))


def test_rule1_removed_present_vulnerable():
    holder = ClassModel("a.C", methods=[
        default_constructor(),
        MethodModel("legacy", "()V", 0x09, code=["return"])])
    kb = _kb_one(_record("method", "a.C: void legacy()", "removed"))
    res = _scan_one(_jar_with(holder), kb)
    (finding,) = res.findings
    assert finding.verdict == VULNERABLE
    assert finding.constructs[0].reason == "removed construct present"


def test_rule1_removed_absent_fixed():
    holder = ClassModel("a.C", methods=[default_constructor()])
    kb = _kb_one(_record("method", "a.C: void legacy()", "removed"))
    res = _scan_one(_jar_with(holder), kb)
    (finding,) = res.findings
    assert finding.verdict == NOT_FLAGGED
    assert finding.constructs[0].verdict == FIXED


def test_rule2_added_absent_class_present_vulnerable():
    holder = ClassModel("a.C", methods=[default_constructor()])
    kb = _kb_one(_record("method", "a.C: void guard()", "added"))
    res = _scan_one(_jar_with(holder), kb)
    (finding,) = res.findings
    assert finding.verdict == VULNERABLE
    assert "declaring class present" in finding.constructs[0].reason


def test_rule2_added_present_fixed():
    holder = ClassModel("a.C", methods=[
        default_constructor(),
        MethodModel("guard", "()V", 0x09, code=["return"])])
    kb = _kb_one(_record("method", "a.C: void guard()", "added"))
    res = _scan_one(_jar_with(holder), kb)
    (finding,) = res.findings
    assert finding.verdict == NOT_FLAGGED
    assert finding.constructs[0].verdict == FIXED


def test_changed_method_missing_counts_vulnerable():
    holder = ClassModel("a.C", methods=[default_constructor()])
    sig = FixSignature(ct=T("c"), pt=T("p"), nt=T("n"))
    kb = _kb_one(_record("method", "a.C: int gone(int)", "changed", signature=sig))
    res = _scan_one(_jar_with(holder), kb)
    (finding,) = res.findings
    assert finding.constructs[0].verdict == VULNERABLE


def test_changed_record_with_class_absent_is_skipped():
    bystander = ClassModel("a.C", methods=[default_constructor()])
    sig = FixSignature(ct=T("c"), pt=T("p"), nt=T("n"))
    kb = KnowledgeBase(records={"CVE-R": [
        _record("method", "a.C: void seen()", "removed"),
        _record("method", "a.Other: int gone(int)", "changed", signature=sig),
    ]})
    res = _scan_one(_jar_with(bystander), kb)
    (finding,) = res.findings
    verdicts = {v.fqn: v.verdict for v in finding.constructs}
    assert verdicts["a.Other: int gone(int)"] == SKIPPED


# ------------------------------------------------------------------- end to end

def test_scan_corpus_pre_and_post(corpus, corpus_kb):
    config = ScanConfig(modes=("default",))
    for cve in corpus.cve_ids:
        pre = scan_jar_bytes("pre.jar", corpus.pre_jars[cve], corpus_kb, config)
        flagged = {f.cve_id for f in pre.findings if f.verdict == VULNERABLE}
        assert flagged == {cve}
        post = scan_jar_bytes("post.jar", corpus.post_jars[cve], corpus_kb, config)
        assert {f.cve_id for f in post.findings if f.verdict == VULNERABLE} == set()


def test_pre_fix_full_detection_per_construct(corpus, corpus_kb):
    config = ScanConfig(modes=("default",))
    for cve in corpus.cve_ids:
        res = scan_jar_bytes("pre.jar", corpus.pre_jars[cve], corpus_kb, config)
        finding = next(f for f in res.findings if f.cve_id == cve)
        assert all(v.verdict == VULNERABLE for v in finding.constructs), cve


def test_post_fix_null_result_per_construct(corpus, corpus_kb):
    config = ScanConfig(modes=("default", "repack"))
    for cve in corpus.cve_ids:
        res = scan_jar_bytes("post.jar", corpus.post_jars[cve], corpus_kb, config)
        for finding in res.findings:
            assert all(v.verdict != VULNERABLE for v in finding.constructs), cve


def test_type23_invariance_merged_and_bare(corpus, corpus_kb):
    config = ScanConfig(modes=("default",))
    separate = set()
    for cve in corpus.cve_ids:
        res = scan_jar_bytes("j.jar", corpus.pre_jars[cve], corpus_kb, config)
        for f in res.findings:
            for v in f.constructs:
                separate.add((f.cve_id, v.fqn, v.change, v.verdict))
    jars = [corpus.pre_jars[c] for c in corpus.cve_ids]
    for kind in (2, 3):
        merged = modify(jars, kind)
        res = scan_jar_bytes("merged.jar", merged, corpus_kb, config)
        got = {(f.cve_id, v.fqn, v.change, v.verdict)
               for f in res.findings for v in f.constructs}
        assert got == separate, f"type {kind} changed per-construct verdicts"


def test_monotone_modes(corpus, corpus_kb):
    for cve in corpus.cve_ids:
        jar = corpus.pre_jars[cve]
        d = scan_jar_bytes("j.jar", jar, corpus_kb, ScanConfig(modes=("default",)))
        both = scan_jar_bytes("j.jar", jar, corpus_kb,
                              ScanConfig(modes=("default", "repack")))
        flagged_d = {f.cve_id for f in d.findings if f.verdict == VULNERABLE}
        flagged_b = {f.cve_id for f in both.findings if f.verdict == VULNERABLE}
        assert flagged_d <= flagged_b


def test_relocation_soundness(corpus, corpus_kb):
    for prefix in ("r.", "shaded.deep."):
        for cve in corpus.cve_ids:
            original = scan_jar_bytes(
                "o.jar", corpus.pre_jars[cve], corpus_kb,
                ScanConfig(modes=("default",)))
            relocated_jar = modify([corpus.pre_jars[cve]], 4, prefix=prefix)
            relocated = scan_jar_bytes(
                "r.jar", relocated_jar, corpus_kb, ScanConfig(modes=("repack",)))
            orig_flagged = {f.cve_id for f in original.findings
                            if f.verdict == VULNERABLE}
            rel_flagged = {f.cve_id for f in relocated.findings
                           if f.verdict == VULNERABLE}
            assert rel_flagged == orig_flagged, (prefix, cve)


def test_default_mode_alone_misses_relocated(corpus, corpus_kb):
    jar = modify([corpus.pre_jars["CVE-9000-0001"]], 4, prefix="r.")
    res = scan_jar_bytes("r.jar", jar, corpus_kb, ScanConfig(modes=("default",)))
    assert {f.cve_id for f in res.findings if f.verdict == VULNERABLE} == set()


def test_scan_report_deterministic(corpus, corpus_kb, tmp_path):
    paths = []
    for cve in corpus.cve_ids[:3]:
        p = tmp_path / f"{cve}.jar"
        p.write_bytes(corpus.pre_jars[cve])
        paths.append(str(p))
    r1 = report_to_json(scan(paths, corpus_kb, ScanConfig()))
    r2 = report_to_json(scan(paths, corpus_kb, ScanConfig(), jobs=3))
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


def test_scan_isolates_bad_archives(tmp_path, corpus_kb):
    good = tmp_path / "good.jar"
    good.write_bytes(write_jar([]))
    bad = tmp_path / "bad.jar"
    bad.write_bytes(b"not a zip at all")
    report = scan([str(bad), str(good)], corpus_kb, ScanConfig())
    assert report.jars[0].error is not None
    assert report.jars[1].error is None


def test_shipped_defaults():
    config = ScanConfig()
    assert config.theta_pt == 0.5
    assert config.theta_cc == 0.3
    assert config.theta_ct == 0.3

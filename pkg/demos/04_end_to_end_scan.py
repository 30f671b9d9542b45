#!/usr/bin/env python3
"""Full pipeline: build a knowledge base, then scan vulnerable and fixed JARs.

One synthetic CVE whose fix changes a method, adds a validator and removes
a legacy entry point. The pre-fix JAR trips all three rules; the post-fix
JAR comes back clean.
"""

from jarscan.classfile import (
    ClassModel,
    MethodModel,
    class_entry_path,
    default_constructor,
    emit_class,
    parse_class,
    write_jar,
)
from jarscan.kb import KnowledgeBase, build_entry
from jarscan.scanner import ScanConfig, render_table, scan_jar_bytes

def library(fixed: bool) -> ClassModel:
    methods = [default_constructor()]
    if fixed:
        methods.append(MethodModel("handle", "(I)I", 0x09, code=[
            "iload_0", ("invokestatic", "demo.Api", "validate", "(I)I"),
            "iconst_2", "imul", "ireturn"]))
        methods.append(MethodModel("validate", "(I)I", 0x09, code=[
            "iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
            "OK:", "iload_0", "ireturn"]))
    else:
        methods.append(MethodModel("handle", "(I)I", 0x09, code=[
            "iload_0", "iconst_2", "imul", "ireturn"]))
        methods.append(MethodModel("legacyHandle", "(I)I", 0x09, code=[
            "iload_0", "iconst_4", "ishl", "ireturn"]))
    methods.append(MethodModel("version", "()I", 0x09, code=[
        ("push_int", 7), "ireturn"]))
    return ClassModel("demo.Api", methods=methods)


def jar_of(model: ClassModel) -> bytes:
    return write_jar([(class_entry_path(model.name), emit_class(model))])


pre, post = library(fixed=False), library(fixed=True)
records = build_entry("CVE-2099-0001",
                      [parse_class(emit_class(pre))],
                      [parse_class(emit_class(post))])
kb = KnowledgeBase(records={"CVE-2099-0001": records})

print("knowledge base records:")
for r in records:
    print(f"  {r.change:8} {r.construct.fqn}")
print()

config = ScanConfig()
for name, jar in (("vulnerable.jar", jar_of(pre)), ("patched.jar", jar_of(post))):
    result = scan_jar_bytes(name, jar, kb, config)
    print(f"== {name} ==")
    for finding in result.findings:
        print(f"  {finding.cve_id}: {finding.verdict}"
              f"  (modes: {sorted(set(finding.modes_fired)) or '-'})")
        for v in finding.constructs:
            if v.mode != "default":
                continue
            extra = f" {v.counts}" if v.counts else f" ({v.reason})"
            print(f"    [{v.verdict:10}] {v.change:8} {v.fqn}{extra}")
    print()

#!/usr/bin/env python3
"""Detecting a vulnerable dependency after package relocation (shading).

The vulnerable library is re-packaged under the prefix "shaded.lib.",
which rewrites every class name and internal reference, exactly what an
uber-JAR relocator does. Default mode cannot match any fully qualified
name anymore; re-packaging mode matches on unqualified signatures, gates
on the class context, compares unqualified triplets, and still finds it.
"""

from jarscan.classfile import (
    ClassModel,
    MethodModel,
    class_entry_path,
    default_constructor,
    emit_class,
    parse_class,
    parse_jar,
    write_jar,
)
from jarscan.kb import KnowledgeBase, build_entry
from jarscan.modharness import modify
from jarscan.scanner import ScanConfig, scan_jar_bytes

def library(fixed: bool) -> ClassModel:
    body = (["iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
             "OK:", "iload_0", "iconst_2", "imul", "ireturn"]
            if fixed else ["iload_0", "iconst_2", "imul", "ireturn"])
    return ClassModel("vuln.lib.Codec", methods=[
        default_constructor(),
        MethodModel("decode", "(I)I", 0x09, code=body),
        MethodModel("encode", "(I)I", 0x09, code=["iload_0", "ineg", "ireturn"]),
        MethodModel("reset", "(I)I", 0x09, code=["iconst_0", "ireturn"]),
        MethodModel("size", "(I)I", 0x09, code=["iload_0", "ireturn"]),
    ])


pre, post = library(False), library(True)
kb = KnowledgeBase(records={"CVE-2099-0002": build_entry(
    "CVE-2099-0002", [parse_class(emit_class(pre))], [parse_class(emit_class(post))])})

plain_jar = write_jar([(class_entry_path(pre.name), emit_class(pre))])
shaded_jar = modify([plain_jar], 4, prefix="shaded.lib.")

relocated = parse_jar(shaded_jar)
print("relocated classes:", [cf.this_class for _p, cf in relocated.classes])
print()

for modes in (("default",), ("repack",), ("default", "repack")):
    result = scan_jar_bytes("shaded.jar", shaded_jar, kb, ScanConfig(modes=modes))
    flagged = [f.cve_id for f in result.findings if f.verdict == "vulnerable"]
    print(f"modes={','.join(modes):16} flagged: {flagged or 'nothing'}")
    for f in result.findings:
        for v in f.constructs:
            if v.verdict == "vulnerable" and v.scanned_fqn:
                print(f"  matched relocated construct: {v.scanned_fqn}")
                if v.counts:
                    print(f"  counts: {v.counts}")
print()
print("Types 1-3 (re-compilation, re-bundling, metadata stripping) never")
print("needed a special mode: the matcher consults bytecode only.")

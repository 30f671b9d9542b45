"""jarscan: bytecode-centric detection of known-vulnerable JVM dependencies.

The package lifts JVM bytecode to a register IR, normalizes away
compiler-induced differences, builds per-method code property graphs, and
matches their edge triplets against a knowledge base of vulnerability-fix
signatures. Works on re-compiled, re-bundled, metadata-stripped and
package-relocated JARs alike.

High-level entry points:

    parse_jar / parse_class      decode archives and class files
    lift / normalize             bytecode -> canonical register IR
    method_triplets / diff       fix signatures from pre/post methods
    build_entry / save / load    knowledge-base lifecycle
    scan / ScanConfig            stage-2 scanning
    modify                       type 1-4 modification harness
"""

from .classfile import list_constructs, parse_class, parse_jar, strip_packages
from .cpg import FixSignature, Triplet, diff, extract_triplets, method_triplets, unqualify
from .ir import build_cfg, dependencies, lift
from .kb import KnowledgeBase, build_entry, build_from_manifest, load, query_fqn, query_unqualified, save
from .modharness import modify
from .normalize import normalize
from .scanner import ScanConfig, ScanReport, match_triplets, report_to_json, retrieve_dependencies, scan

__version__ = "0.1.0"

__all__ = [
    "FixSignature", "KnowledgeBase", "ScanConfig", "ScanReport", "Triplet",
    "build_cfg", "build_entry", "build_from_manifest", "dependencies",
    "diff", "extract_triplets", "lift", "list_constructs", "load",
    "match_triplets", "method_triplets", "modify", "normalize",
    "parse_class", "parse_jar", "query_fqn", "query_unqualified",
    "report_to_json", "retrieve_dependencies", "save", "scan",
    "strip_packages", "unqualify", "__version__",
]

#!/usr/bin/env python3
"""Turn a pre/post-fix method pair into a matchable fix signature.

The fix adds an input guard. Both bodies become code property graphs whose
edges are encoded as (source-label, edge-label, target-label) triplets;
set algebra splits them into context (unchanged), positive (added by the
fix) and negative (removed by the fix) triplets.
"""

from jarscan.classfile import ClassModel, MethodModel, emit_class, parse_class
from jarscan.cpg import diff, method_triplets

def method(code):
    model = ClassModel("demo.S", methods=[MethodModel("f", "(I)I", 0x09, code=code)])
    cf = parse_class(emit_class(model))
    return cf, cf.methods[0]

vulnerable = method(["iload_0", "iconst_2", "imul", "ireturn"])
fixed = method([
    "iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
    "OK:", "iload_0", "iconst_2", "imul", "ireturn",
])

t_vul = method_triplets(*vulnerable)
t_fix = method_triplets(*fixed)
signature = diff(t_vul, t_fix)

for label, triplets in (("context (CT)", signature.ct),
                        ("positive (PT)", signature.pt),
                        ("negative (NT)", signature.nt)):
    print(f"{label}: {len(triplets)} triplets")
    for t in sorted(triplets):
        print(f"   {t.source}  --{t.edge}-->  {t.target}")
    print()

print("A scanned method matching many NT triplets (or few PT ones) is")
print("still in its pre-fix state; matching the PT triplets means the fix")
print("has been applied.")

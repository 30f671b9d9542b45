#!/usr/bin/env python3
"""Parse class files and JARs, and list the constructs a scan matches on.

Builds a tiny two-class library with the emitter, packs it into a JAR,
parses it back, and prints every construct with its fully qualified and
unqualified name. The unqualified form is what survives package
relocation.
"""

from jarscan.classfile import (
    ClassModel,
    MethodModel,
    class_entry_path,
    default_constructor,
    emit_class,
    list_constructs,
    parse_jar,
    write_jar,
)

c = ClassModel("a.C", methods=[
    default_constructor(),
    MethodModel("foo", "(La/b/X;)V", code=[
        ("aload", 1),
        ("invokevirtual", "a.b.X", "bar", "()I"),
        ("istore", 2),
        "return",
    ]),
])
x = ClassModel("a.b.X", methods=[
    default_constructor(),
    MethodModel("bar", "()I", code=["iconst_1", "ireturn"]),
])

jar = write_jar([(class_entry_path(m.name), emit_class(m)) for m in (c, x)])
archive = parse_jar(jar)

print(f"archive: {len(archive.classes)} classes, "
      f"metadata present: {archive.metadata_present}\n")
for path, cf in archive.classes:
    print(f"{path}  (major version {cf.major_version})")
    for construct in list_constructs(cf):
        print(f"  {construct.kind:9} {construct.fqn}")
        print(f"  {'':9} unqualified: {construct.unqualified}")
    print()

"""JVM class-file and JAR parsing, plus a small emitter for synthetic classes."""

from .constructs import ConstructId, class_construct, list_constructs, method_construct, strip_packages
from .emitter import (
    ClassModel,
    FieldModel,
    MethodModel,
    class_entry_path,
    default_constructor,
    emit_class,
    emit_class_resolved,
    write_jar,
)
from .model import (
    ClassFile,
    CodeAttribute,
    ExceptionHandler,
    FieldInfo,
    Instruction,
    JarArchive,
    MethodInfo,
    ParseFailure,
)
from .parser import parse_class, parse_jar

__all__ = [
    "ClassFile", "ClassModel", "CodeAttribute", "ConstructId", "ExceptionHandler",
    "FieldInfo", "FieldModel", "Instruction", "JarArchive", "MethodInfo",
    "MethodModel", "ParseFailure", "class_construct", "class_entry_path",
    "default_constructor", "emit_class", "emit_class_resolved",
    "list_constructs", "method_construct", "parse_class", "parse_jar",
    "strip_packages", "write_jar",
]

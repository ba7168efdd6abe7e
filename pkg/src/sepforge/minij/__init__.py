from sepforge.minij.parser import parse_method
from sepforge.minij.printer import print_method
from sepforge.minij.typeenv import TypeEnv, build_type_env, load_signatures

__all__ = ["parse_method", "print_method", "TypeEnv", "build_type_env", "load_signatures"]

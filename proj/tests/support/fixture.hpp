#pragma once

#include <string>

#include "symml/error.hpp"
#include "symml/zoo.hpp"

namespace symml::testing {

// One registry pair per process; tests only read it.
inline const zoo::Workspace& ws() {
  static const zoo::Workspace w = zoo::make_workspace();
  return w;
}
inline const TypeRegistry& types() { return ws().types; }
inline const PatcherRegistry& patchers() { return ws().patchers; }

// Kind tag of whatever `fn` throws, or "" when it returns normally.
template <typename Fn>
std::string error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace symml::testing

#include "symml/error.hpp"

namespace symml {
namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

UnknownType::UnknownType(std::vector<std::string> names,
                         std::vector<std::string> manifest)
    : Error("UnknownType",
            "unregistered type(s): " + join(names) +
                (manifest.empty() ? std::string()
                                  : " (document requires: " + join(manifest) +
                                        ")")),
      names_(std::move(names)),
      manifest_(std::move(manifest)) {}

}  // namespace symml

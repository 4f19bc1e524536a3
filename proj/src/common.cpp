#include "splicekit/common.hpp"

#include <iostream>

namespace splicekit {

void emit_warning(const WarningSink& sink, const std::string& message) {
  if (sink) {
    sink(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

}  // namespace splicekit

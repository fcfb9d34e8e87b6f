#include "gpetas/rng.hpp"

#include <sstream>

#include "gpetas/errors.hpp"

namespace gpetas {

std::string RngStream::serialize_state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void RngStream::restore_state(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (is.fail()) throw DataError("rng: failed to restore engine state");
}

}  // namespace gpetas

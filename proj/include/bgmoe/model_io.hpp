#ifndef BGMOE_MODEL_IO_HPP
#define BGMOE_MODEL_IO_HPP

#include <string>

#include "bgmoe/model.hpp"

namespace bgmoe {

/// Versioned, checksummed model document (JSON). Coefficients round-trip
/// bit-exactly; responsibilities are not persisted.
void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

}  // namespace bgmoe

#endif

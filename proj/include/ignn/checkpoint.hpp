#pragma once

// Binary model container, all integers and floats little-endian:
//   "IGNN" | u32 version | u64 hyper_len | hyper block | u32 tensor_count |
//   tensor_count x (u32 name_len | name | u64 rows | u64 cols | rows*cols f64, row-major)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "ignn/model.hpp"

namespace ignn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void save_checkpoint(const IgnnModel& model, std::ostream& out);
void save_checkpoint(const IgnnModel& model, const std::filesystem::path& path);
IgnnModel load_checkpoint(std::istream& in);
IgnnModel load_checkpoint(const std::filesystem::path& path);

// Bytes taken by the fixed header and the hyperparameter block (everything before the first tensor record).
std::size_t checkpoint_header_size(const IgnnModel& model);

}  // namespace ignn

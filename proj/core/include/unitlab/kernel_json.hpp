#pragma once

// Kernel JSON codec:
//   {"dim": d, "labels": [...], "entries": {"s|s'": [[re, im], ...]}}
// with the d^4 entries of each superoperator representation in row-major
// order. Doubles are written with round-trip precision.

#include <filesystem>
#include <string>
#include <string_view>

#include "unitlab/kernels.hpp"

namespace unitlab {

std::string kernel_to_json(const OperatorKernel& kernel, int indent = -1);
/// Throws ParseError on malformed documents.
OperatorKernel kernel_from_json(std::string_view text);

OperatorKernel read_kernel_file(const std::filesystem::path& path);
void write_kernel_file(const std::filesystem::path& path, const OperatorKernel& kernel);

}  // namespace unitlab

#pragma once

#include <filesystem>
#include <iosfwd>

#include "adaptd/mdp.hpp"

namespace adaptd {

// Line-delimited JSON. First line is a header
//   {"format":"adaptd-dataset","version":1,"env_id":...,"policy_id":...,"seed":...}
// followed by one object per trajectory:
//   {"states":[s0,...,sT],"actions":[...],"rewards":[...],"terminal":bool}
// `states` holds T+1 entries (the final next-state included). A discrete state
// is written as an integer, a continuous one as [x, y].

void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Throws std::runtime_error on malformed input.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace adaptd

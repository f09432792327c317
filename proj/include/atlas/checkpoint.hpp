#pragma once

#include <filesystem>
#include <iosfwd>

#include "atlas/model.hpp"
#include "atlas/vocab.hpp"

namespace atlas {

// Binary checkpoint layout:
//   8 bytes  magic "ATLSCKPT"
//   u32      format version
//   u64      header length, then a JSON header (variant, config, vocabulary,
//            tensor manifest with names and shapes)
//   raw little-endian IEEE-754 doubles for each tensor, in manifest order,
//            column-major
// Writing then reading reproduces every parameter bit for bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
};

void write_checkpoint(const ModelParams& params, const Vocabulary& vocab, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace atlas

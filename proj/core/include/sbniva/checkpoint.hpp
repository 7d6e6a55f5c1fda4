#pragma once

#include <iosfwd>
#include <string>

#include "sbniva/trainer.hpp"

namespace sbniva {

// Versioned JSON container with every parameter tensor under a named key
// (see README for the key list), the vocabulary, the training config and the
// per-epoch history. Doubles round-trip bit-exactly.
void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in);

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace sbniva

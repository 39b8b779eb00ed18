#pragma once

#include "a64/instr.hpp"
#include "a64/word.hpp"

namespace a64 {

// Decode one 32-bit instruction word. Never throws; architecturally
// unallocated or reserved encodings come back with Category::Undefined.
DecodedInstr decode(MachineWord w);

}  // namespace a64

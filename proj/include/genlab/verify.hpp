#pragma once

#include <iosfwd>

namespace genlab {

// Self-contained installation check: exercises the kernel backends, the
// autodiff tape, spectral normalization, the loss definitions, the Frechet
// metric and end-to-end training determinism.  Prints one "[ok]"/"[FAIL]"
// line per check to `os` and returns true when everything passed.  Runs in
// well under a minute on a laptop core.
bool run_verify(std::ostream& os);

}  // namespace genlab

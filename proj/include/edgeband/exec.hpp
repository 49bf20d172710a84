#pragma once

namespace edgeband {

// serial runs a plain loop (reference implementation); parallel uses OpenMP
// worksharing; both produce identical output ordering
enum class Exec { serial, parallel };

void set_max_threads(int n);
int max_threads();

} // namespace edgeband

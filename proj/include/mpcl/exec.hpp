#pragma once

namespace mpcl {

// Serial paths are the reference implementations; parallel paths must produce
// identical results for identical seeds.
enum class Exec { serial, parallel };

}  // namespace mpcl

#pragma once

#include <map>
#include <string>

namespace priorseg {

// Convention choices that affect numbers, echoed into every report and
// sidecar so downstream consumers can tell which variant produced a file.
const std::map<std::string, std::string>& convention_notes();

}  // namespace priorseg

#pragma once

#include <filesystem>
#include <string>

// Locale-independent numeric text: decimal, 17 significant digits,
// '.' radix. Files are written to a temporary sibling and renamed into
// place so readers never observe a partial file.

namespace sis {

std::string format_double(double v);

void atomic_write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sis

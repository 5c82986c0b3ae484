#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dgp {

using json = nlohmann::json;

// Throws ValidationError naming the path when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes via a temporary file in the same directory and renames it into
// place, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Calls fn(object, "path:line") for every non-blank line of a JSONL file.
// Malformed JSON raises ValidationError with the line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, const std::string&)>& fn);

// Same as for_each_jsonl over in-memory text; `name` labels error messages.
void for_each_jsonl_text(std::string_view text, const std::string& name,
                         const std::function<void(const json&, const std::string&)>& fn);

}  // namespace dgp

#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace lightcone {

/// Locale-independent CSV output; floating-point fields use 17 significant
/// digits so values round-trip exactly.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os);

    void header(std::initializer_list<std::string> names);
    void header(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);

    template <typename... Ts>
    void row(Ts... values) {
        row(std::vector<double>{static_cast<double>(values)...});
    }

private:
    std::ostream& os_;
};

std::string format_double(double x);

/// Writes `contents` to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace lightcone

#pragma once

#include <map>
#include <string>

#include "aperture/table.hpp"

namespace aperture {

// Parses an RFC-4180 subset: UTF-8, header row, optional quoting with ""
// escapes, LF or CRLF records. Empty fields load as missing. Column kinds
// come from infer_column_kind unless a hint names the column. Throws
// ParseError for empty input or ragged rows (naming the line).
Table parse_csv(const std::string& text,
                const std::map<std::string, ColumnKind>& hints = {});

// parse_csv over a file's bytes; errors mention the path.
Table load_csv(const std::string& path,
               const std::map<std::string, ColumnKind>& hints = {});

// Header plus one record per row: numbers in shortest round-trip form,
// missing cells empty, text quoted only when it needs to be.
std::string write_csv(const Table& t);

} // namespace aperture

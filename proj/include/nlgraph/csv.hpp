#pragma once

#include "errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nlgraph::csv
{

struct Table
{
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;
	/// 1-based source line of each row, for error messages.
	std::vector<std::size_t> lines;

	/// Column position by name, or -1.
	int column(std::string_view name) const
	{
		for (std::size_t i = 0; i < header.size(); ++i)
			if (header[i] == name)
				return static_cast<int>(i);
		return -1;
	}
};

inline std::string trim(std::string_view s)
{
	std::size_t b = 0, e = s.size();
	while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n'))
		++b;
	while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n'))
		--e;
	return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_line(std::string_view line)
{
	std::vector<std::string> out;
	std::size_t start = 0;
	for (std::size_t i = 0; i <= line.size(); ++i)
	{
		if (i == line.size() || line[i] == ',')
		{
			out.push_back(trim(line.substr(start, i - start)));
			start = i + 1;
		}
	}
	return out;
}

/// Reads a comma-separated table with a header row. Blank lines are skipped.
/// Every data row must have as many cells as the header.
inline Table read(std::istream& in)
{
	Table t;
	std::string line;
	std::size_t lineno = 0;
	bool have_header = false;
	while (std::getline(in, line))
	{
		++lineno;
		if (trim(line).empty())
			continue;
		auto cells = split_line(line);
		if (!have_header)
		{
			if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
				cells.front() = trim(cells.front().substr(3)); // UTF-8 BOM
			t.header = std::move(cells);
			have_header = true;
			continue;
		}
		if (cells.size() != t.header.size())
			throw SchemaError("line " + std::to_string(lineno) + ": expected " +
				std::to_string(t.header.size()) + " columns, found " + std::to_string(cells.size()));
		t.rows.push_back(std::move(cells));
		t.lines.push_back(lineno);
	}
	if (!have_header)
		throw SchemaError("empty CSV input: missing header row");
	return t;
}

inline Table read_file(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open '" + path + "'");
	return read(in);
}

/// Parses a finite real; throws ParseError naming the line otherwise.
inline double parse_real(const std::string& cell, std::size_t line)
{
	double v = 0.0;
	const char* first = cell.data();
	const char* last = cell.data() + cell.size();
	if (!cell.empty() && *first == '+')
		++first;
	auto [ptr, ec] = std::from_chars(first, last, v);
	if (ec != std::errc() || ptr != last || cell.empty())
		throw ParseError("'" + cell + "' is not a number", line);
	if (!std::isfinite(v))
		throw ParseError("'" + cell + "' is not finite", line);
	return v;
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_real(double v)
{
	char buf[64];
	auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
	return std::string(buf, ptr);
}

class Writer
{
public:
	explicit Writer(std::ostream& out) : out_(out) {}

	Writer& header(const std::vector<std::string>& names)
	{
		for (std::size_t i = 0; i < names.size(); ++i)
			out_ << (i ? "," : "") << names[i];
		out_ << '\n';
		return *this;
	}

	template <typename Range>
	Writer& row(const Range& values)
	{
		bool first = true;
		for (const auto& v : values)
		{
			out_ << (first ? "" : ",") << cell(v);
			first = false;
		}
		out_ << '\n';
		return *this;
	}

private:
	static std::string cell(double v) { return format_real(v); }
	static std::string cell(const std::string& s) { return s; }
	static std::string cell(const char* s) { return s; }
	template <typename I>
	static std::string cell(I v)
		requires std::is_integral_v<I>
	{
		return std::to_string(v);
	}

	std::ostream& out_;
};

} // namespace nlgraph::csv

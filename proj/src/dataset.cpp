#include "demand/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace demand {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string>& categorical_columns() {
    static const std::vector<std::string> cols = {
        "brand", "country", "colour", "form", "flour", "package_type", "store_type"};
    return cols;
}

const std::vector<std::string>& csv_header() {
    static const std::vector<std::string> cols = {
        "sku_id", "store_id", "date",  "sales", "price",        "weight",     "promotion",
        "brand",  "country",  "colour", "form",  "flour",        "package_type", "store_type",
        "holiday"};
    return cols;
}

CivilDate parse_date(const std::string& iso) {
    auto fail = [&]() {
        throw std::invalid_argument("invalid ISO-8601 date: '" + iso + "'");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') fail();
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(iso[i]))) fail();
    CivilDate d;
    d.year = std::stoi(iso.substr(0, 4));
    d.month = std::stoi(iso.substr(5, 2));
    d.day = std::stoi(iso.substr(8, 2));
    if (d.month < 1 || d.month > 12) fail();
    const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    static const int days_in[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days_in[d.month - 1] + (d.month == 2 && leap ? 1 : 0);
    if (d.day < 1 || d.day > dim) fail();
    return d;
}

// Howard Hinnant's days-from-civil algorithm.
static long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097LL + static_cast<long long>(doe) - 719468LL;
}

int day_of_week(const CivilDate& d) {
    long long z = days_from_civil(d.year, d.month, d.day);
    // 1970-01-01 was a Thursday; map so 0 = Monday.
    return static_cast<int>(((z % 7) + 7 + 3) % 7);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void row_error(size_t row, const std::string& column, const std::string& what) {
    throw std::invalid_argument("row " + std::to_string(row) + ", column '" + column + "': " + what);
}

long long parse_count(const std::string& s, size_t row, const std::string& col) {
    if (s.empty()) row_error(row, col, "empty cell");
    size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        row_error(row, col, "not an integer: '" + s + "'");
    }
    if (pos != s.size()) row_error(row, col, "not an integer: '" + s + "'");
    if (v < 0) row_error(row, col, "negative value " + s);
    return v;
}

double parse_positive(const std::string& s, size_t row, const std::string& col) {
    if (s.empty()) row_error(row, col, "empty cell");
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        row_error(row, col, "not numeric: '" + s + "'");
    }
    if (pos != s.size()) row_error(row, col, "not numeric: '" + s + "'");
    if (!(v > 0)) row_error(row, col, "must be strictly positive, got " + s);
    return v;
}

int parse_binary(const std::string& s, size_t row, const std::string& col) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    row_error(row, col, "expected 0 or 1, got '" + s + "'");
}

Vocabulary vocab_from_json(const ordered_json& j) {
    Vocabulary vocab;
    for (const auto& name : categorical_columns()) {
        if (!j.contains(name))
            throw std::invalid_argument("vocabulary file missing variable '" + name + "'");
        std::vector<std::string> levels = j.at(name).get<std::vector<std::string>>();
        if (levels.empty())
            throw std::invalid_argument("vocabulary for '" + name + "' is empty");
        vocab[name] = std::move(levels);
    }
    return vocab;
}

Dataset parse_csv(std::istream& in, const Vocabulary& vocab) {
    Dataset ds;
    ds.vocab = vocab;

    std::map<std::string, std::unordered_set<std::string>> level_sets;
    for (const auto& [name, levels] : vocab)
        level_sets[name] = std::unordered_set<std::string>(levels.begin(), levels.end());

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV: no header row");
    if (split_csv_line(line) != csv_header())
        throw std::invalid_argument("CSV header does not match the expected schema");

    size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != csv_header().size())
            throw std::invalid_argument("row " + std::to_string(row_no) + ": expected " +
                                        std::to_string(csv_header().size()) + " fields, got " +
                                        std::to_string(f.size()));
        Observation o;
        o.sku_id = f[0];
        o.store_id = f[1];
        o.date = f[2];
        if (o.sku_id.empty()) row_error(row_no, "sku_id", "empty cell");
        if (o.store_id.empty()) row_error(row_no, "store_id", "empty cell");
        CivilDate cd;
        try {
            cd = parse_date(o.date);
        } catch (const std::exception& e) {
            row_error(row_no, "date", e.what());
        }
        o.year = cd.year;
        o.month = cd.month;
        o.day_of_week = day_of_week(cd);
        o.sales = parse_count(f[3], row_no, "sales");
        o.price = parse_positive(f[4], row_no, "price");
        o.weight = parse_positive(f[5], row_no, "weight");
        o.promotion = parse_binary(f[6], row_no, "promotion");
        const std::string* cat_values[] = {&f[7], &f[8], &f[9], &f[10], &f[11], &f[12], &f[13]};
        std::string Observation::*cat_fields[] = {
            &Observation::brand,  &Observation::country,      &Observation::colour,
            &Observation::form,   &Observation::flour,        &Observation::package_type,
            &Observation::store_type};
        for (size_t c = 0; c < categorical_columns().size(); ++c) {
            const std::string& name = categorical_columns()[c];
            const std::string& value = *cat_values[c];
            if (!level_sets.at(name).count(value))
                row_error(row_no, name, "level '" + value + "' not in declared vocabulary");
            o.*cat_fields[c] = value;
        }
        o.holiday = parse_binary(f[14], row_no, "holiday");
        ds.rows.push_back(std::move(o));
    }
    return ds;
}

}  // namespace

Dataset load_dataset(const std::string& csv_path, const std::string& vocab_path) {
    std::ifstream vf(vocab_path);
    if (!vf) throw std::invalid_argument("cannot open vocabulary file: " + vocab_path);
    ordered_json j;
    try {
        vf >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("invalid vocabulary JSON in " + vocab_path + ": " + e.what());
    }
    std::ifstream cf(csv_path);
    if (!cf) throw std::invalid_argument("cannot open dataset file: " + csv_path);
    return parse_csv(cf, vocab_from_json(j));
}

Dataset load_dataset_from_strings(const std::string& csv_text, const Vocabulary& vocab) {
    std::istringstream in(csv_text);
    return parse_csv(in, vocab);
}

std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream out;
    const auto& header = csv_header();
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    char buf[64];
    for (const auto& o : ds.rows) {
        out << o.sku_id << ',' << o.store_id << ',' << o.date << ',' << o.sales << ',';
        std::snprintf(buf, sizeof(buf), "%.10g", o.price);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.10g", o.weight);
        out << buf << ',' << o.promotion << ',' << o.brand << ',' << o.country << ',' << o.colour
            << ',' << o.form << ',' << o.flour << ',' << o.package_type << ',' << o.store_type
            << ',' << o.holiday << "\n";
    }
    return out.str();
}

void save_dataset(const Dataset& ds, const std::string& csv_path, const std::string& vocab_path) {
    {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot write dataset file: " + csv_path);
        out << dataset_to_csv(ds);
    }
    ordered_json j;
    for (const auto& name : categorical_columns()) j[name] = ds.vocab.at(name);
    std::ofstream out(vocab_path);
    if (!out) throw std::runtime_error("cannot write vocabulary file: " + vocab_path);
    out << j.dump(2) << "\n";
}

}  // namespace demand

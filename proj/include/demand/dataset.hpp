#pragma once

#include "demand/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace demand {

// One row of the sales panel: a SKU displayed in a store on a day.
struct Observation {
    std::string sku_id;
    std::string store_id;
    std::string date;  // ISO-8601 yyyy-mm-dd
    long long sales = 0;
    double price = 0.0;
    double weight = 0.0;
    int promotion = 0;
    std::string brand, country, colour, form, flour, package_type, store_type;
    int holiday = 0;
    // Derived from date on load.
    int year = 0, month = 0, day_of_week = 0;
};

// Declared level sets for the categorical variables, keyed by column name.
// Levels outside the declared set are load errors.
using Vocabulary = std::map<std::string, std::vector<std::string>>;

struct Dataset {
    std::vector<Observation> rows;
    Vocabulary vocab;
};

// Names of the categorical columns carried in the CSV, in schema order.
const std::vector<std::string>& categorical_columns();

// Column order of the canonical CSV format.
const std::vector<std::string>& csv_header();

// Strict ISO date parse; returns {year, month, day} and validates the
// calendar (including leap years). Throws std::invalid_argument.
struct CivilDate {
    int year, month, day;
};
CivilDate parse_date(const std::string& iso);
int day_of_week(const CivilDate& d);  // 0 = Monday ... 6 = Sunday

Dataset load_dataset(const std::string& csv_path, const std::string& vocab_path);
Dataset load_dataset_from_strings(const std::string& csv_text, const Vocabulary& vocab);

void save_dataset(const Dataset& ds, const std::string& csv_path, const std::string& vocab_path);
std::string dataset_to_csv(const Dataset& ds);

}  // namespace demand

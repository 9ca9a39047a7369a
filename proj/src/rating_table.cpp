// Copyright 2026 The textpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "textpos/rating_table.hpp"

#include "textpos/delimited.hpp"
#include "textpos/errors.hpp"
#include "textpos/numbers.hpp"

namespace textpos {

std::vector<double> RatingTable::ratings(std::size_t item) const {
  std::vector<double> out;
  for (const auto& c : cells_[item]) {
    if (c.value) out.push_back(*c.value);
  }
  return out;
}

std::size_t RatingTable::rating_count(std::size_t item) const {
  std::size_t n = 0;
  for (const auto& c : cells_[item]) n += c.value.has_value();
  return n;
}

std::optional<std::size_t> RatingTable::find_item(std::string_view item_id) const {
  auto it = item_index_.find(item_id);
  if (it == item_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> RatingTable::cell(std::string_view item_id, std::string_view rater_id) const {
  auto item = find_item(item_id);
  auto rater = rater_index_.find(rater_id);
  if (!item || rater == rater_index_.end()) return std::nullopt;
  for (const auto& c : cells_[*item]) {
    if (c.rater == rater->second) return c.value;
  }
  return std::nullopt;
}

std::size_t RatingTable::intern_rater(const std::string& rater_id) {
  auto [it, inserted] = rater_index_.emplace(rater_id, raters_.size());
  if (inserted) raters_.push_back(rater_id);
  return it->second;
}

void RatingTable::add_item(const std::string& item_id) {
  auto [it, inserted] = item_index_.emplace(item_id, items_.size());
  if (inserted) {
    items_.push_back(item_id);
    cells_.emplace_back();
  }
}

void RatingTable::add(const std::string& item_id, const std::string& rater_id,
                      std::optional<double> value) {
  if (value && !scale_.contains(*value)) {
    throw DataError("rating " + format_number(*value) + " outside scale [" +
                    format_number(scale_.min) + ", " + format_number(scale_.max) + "]");
  }
  add_item(item_id);
  const std::size_t index = item_index_.find(item_id)->second;
  const std::size_t rater = intern_rater(rater_id);
  for (const auto& c : cells_[index]) {
    if (c.rater == rater) {
      throw DataError("duplicate rating for item " + item_id + ", rater " + rater_id);
    }
  }
  cells_[index].push_back({rater, value});
}

std::vector<std::string> RatingTable::drop_unrated_items() {
  std::vector<std::string> dropped;
  std::vector<std::string> items;
  std::vector<std::vector<Cell>> cells;
  item_index_.clear();
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (rating_count(i) == 0) {
      dropped.push_back(items_[i]);
      continue;
    }
    item_index_.emplace(items_[i], items.size());
    items.push_back(std::move(items_[i]));
    cells.push_back(std::move(cells_[i]));
  }
  items_ = std::move(items);
  cells_ = std::move(cells);
  return dropped;
}

RatingLayout parse_rating_layout(std::string_view s) {
  if (s == "long") return RatingLayout::kLong;
  if (s == "wide") return RatingLayout::kWide;
  throw ConfigError("unknown rating layout '" + std::string(s) + "'");
}

RatingTableLoad parse_rating_table(std::string_view content, RatingLayout layout,
                                   const Scale& scale, const RatingColumns& columns,
                                   char delimiter) {
  scale.validate();
  auto table = parse_delimited(content, delimiter);
  RatingTableLoad out{RatingTable(scale), {}, {}};

  const int item_col = table.column(columns.item_id);
  std::vector<std::string> missing;
  if (item_col < 0) missing.push_back(columns.item_id);
  int rater_col = -1;
  int rating_col = -1;
  if (layout == RatingLayout::kLong) {
    rater_col = table.column(columns.rater_id);
    rating_col = table.column(columns.rating);
    if (rater_col < 0) missing.push_back(columns.rater_id);
    if (rating_col < 0) missing.push_back(columns.rating);
  }
  if (!missing.empty()) {
    std::string msg = "missing rating column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  // Returns false and records a rejection for unusable cells.
  auto add_cell = [&](std::size_t line, const std::string& item, const std::string& rater,
                      std::string_view raw, bool empty_means_absent) {
    std::optional<double> value;
    if (is_missing_marker(raw)) {
      if (empty_means_absent && trim(raw).empty()) return;
    } else {
      value = parse_number(raw);
      if (!value) {
        out.rejected.push_back({line, item, "non-numeric rating '" + std::string(raw) + "'"});
        return;
      }
      if (!scale.contains(*value)) {
        out.rejected.push_back({line, item, "rating " + std::string(trim(raw)) + " out of range"});
        return;
      }
    }
    out.table.add(item, rater, value);
  };

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.row_lines[r];
    const std::string item(trim(row[static_cast<std::size_t>(item_col)]));
    if (item.empty()) {
      out.rejected.push_back({line, "", "missing item id"});
      continue;
    }
    if (layout == RatingLayout::kLong) {
      const std::string rater(trim(row[static_cast<std::size_t>(rater_col)]));
      if (rater.empty()) {
        out.rejected.push_back({line, item, "missing rater id"});
        continue;
      }
      out.table.add_item(item);
      add_cell(line, item, rater, row[static_cast<std::size_t>(rating_col)], false);
    } else {
      out.table.add_item(item);
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (static_cast<int>(c) == item_col) continue;
        add_cell(line, item, table.header[c], row[c], true);
      }
    }
  }
  out.dropped_items = out.table.drop_unrated_items();
  return out;
}

RatingTableLoad load_rating_table(const std::filesystem::path& path, RatingLayout layout,
                                  const Scale& scale, const RatingColumns& columns,
                                  char delimiter) {
  const std::string content = read_file(path);
  try {
    return parse_rating_table(content, layout, scale, columns, delimiter);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace textpos

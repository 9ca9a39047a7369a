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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textpos/corpus.hpp"
#include "textpos/scale.hpp"

namespace textpos {

// Item x rater matrix of human scores. Cells are sparse: a rater who never saw
// an item has no cell, a rater who answered "NA" has a cell without a value.
// Missing cells are never imputed.
class RatingTable {
 public:
  struct Cell {
    std::size_t rater = 0;  // index into raters()
    std::optional<double> value;
  };

  RatingTable() = default;
  explicit RatingTable(Scale scale) : scale_(std::move(scale)) {}

  const Scale& scale() const { return scale_; }
  const std::vector<std::string>& items() const { return items_; }
  const std::vector<std::string>& raters() const { return raters_; }
  std::size_t item_count() const { return items_.size(); }

  // Cells of item i in insertion order.
  const std::vector<Cell>& cells(std::size_t item) const { return cells_[item]; }
  // Non-missing values of item i in insertion order.
  std::vector<double> ratings(std::size_t item) const;
  std::size_t rating_count(std::size_t item) const;

  std::optional<std::size_t> find_item(std::string_view item_id) const;
  std::optional<double> cell(std::string_view item_id, std::string_view rater_id) const;

  // Registers an item without cells (no-op if it exists).
  void add_item(const std::string& item_id);

  // Adds a cell. Throws DataError on a duplicate (item, rater) pair or a value
  // outside the scale.
  void add(const std::string& item_id, const std::string& rater_id, std::optional<double> value);

  // Drops items with no non-missing rating and returns their ids.
  std::vector<std::string> drop_unrated_items();

 private:
  std::size_t intern_rater(const std::string& rater_id);

  Scale scale_;
  std::vector<std::string> items_;
  std::vector<std::string> raters_;
  std::vector<std::vector<Cell>> cells_;
  std::map<std::string, std::size_t, std::less<>> item_index_;
  std::map<std::string, std::size_t, std::less<>> rater_index_;
};

enum class RatingLayout { kLong, kWide };

RatingLayout parse_rating_layout(std::string_view s);

struct RatingColumns {
  std::string item_id = "item_id";
  std::string rater_id = "rater_id";  // long layout only
  std::string rating = "rating";      // long layout only
};

struct RatingTableLoad {
  RatingTable table;
  // Out-of-range or non-numeric cells.
  std::vector<Rejection> rejected;
  // Items dropped because no rating survived.
  std::vector<std::string> dropped_items;
};

// Long layout: one row per (item, rater, rating|NA). Wide layout: one row per
// item, every column other than the item column is a rater. "NA" and empty
// cells are missing (in wide layout an empty cell means "not rated" and adds
// no cell). A duplicate (item, rater) pair raises DataError.
RatingTableLoad load_rating_table(const std::filesystem::path& path, RatingLayout layout,
                                  const Scale& scale, const RatingColumns& columns = {},
                                  char delimiter = ',');

RatingTableLoad parse_rating_table(std::string_view content, RatingLayout layout,
                                   const Scale& scale, const RatingColumns& columns = {},
                                   char delimiter = ',');

}  // namespace textpos

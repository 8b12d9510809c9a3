#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "featprop/graph.hpp"

namespace featprop {

enum class DatasetFormat { content_cites, json };

std::optional<DatasetFormat> parse_dataset_format(std::string_view name);
std::string_view format_name(DatasetFormat format);

struct LoadOptions {
  bool row_normalize = true;
  /// Skip edges whose endpoints are not declared in the node file instead of
  /// failing. Raw Citeseer needs this.
  bool drop_unknown_edges = false;
};

/// Loads a dataset.
///
/// content-cites: `path` is either the `<name>` prefix of `<name>.content` /
/// `<name>.cites`, one of those two files, or a directory holding exactly one
/// `.content` file. Content lines are `id f_1 ... f_d label` (tab or space
/// separated); cites lines are `cited citing`. Node order and class ids follow
/// first appearance in the content file.
///
/// json: `{"edges": [[i,j],...], "features": [[...],...], "labels": [...]}`,
/// optional `"name"` and `"class_names"`. Labels are remapped to dense ids by
/// first appearance.
///
/// Throws ParseError (with line number) on malformed input and IntegrityError
/// on duplicate node ids or edges naming undeclared nodes.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const LoadOptions& options = {});

/// Writes the json format. Values are printed in shortest round-trip form.
void save_json(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace featprop

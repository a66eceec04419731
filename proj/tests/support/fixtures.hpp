#pragma once

#include <filesystem>
#include <string>

#include "relanno/dataset.hpp"
#include "relanno/prompting.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return RELANNO_DATA_DIR; }

inline relanno::dataset::Dataset fig1()
{
    return relanno::dataset::load_dataset(data_dir() / "fig1.jsonl", data_dir() / "schemas.json");
}

inline relanno::prompting::ExemplarBank paper_exemplars()
{
    return relanno::prompting::ExemplarBank::load(data_dir() / "exemplars_org_date.json");
}

} // namespace fixtures

#ifndef SADIH_SADIH_HPP_
#define SADIH_SADIH_HPP_

#include "sadih/config.hpp"
#include "sadih/dataset.hpp"
#include "sadih/encoder.hpp"
#include "sadih/eval.hpp"
#include "sadih/index.hpp"
#include "sadih/model.hpp"
#include "sadih/optimizer.hpp"
#include "sadih/pipeline.hpp"
#include "sadih/similarity.hpp"
#include "sadih/synthetic.hpp"
#include "sadih/types.hpp"

#endif  // SADIH_SADIH_HPP_

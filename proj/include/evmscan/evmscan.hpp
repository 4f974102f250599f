// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include "evmscan/word.hpp"
#include "evmscan/opcodes.hpp"
#include "evmscan/disassembler.hpp"
#include "evmscan/assembler.hpp"
#include "evmscan/expr.hpp"
#include "evmscan/keccak.hpp"
#include "evmscan/cfg.hpp"
#include "evmscan/executor.hpp"
#include "evmscan/features.hpp"
#include "evmscan/defects.hpp"
#include "evmscan/config.hpp"
#include "evmscan/batch.hpp"
#include "evmscan/rpc.hpp"

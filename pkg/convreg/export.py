# -*- coding: utf-8 -*-

"""Writers and readers of the sweep report JSON and the records CSV."""

from __future__ import division

import csv
import io
import json
import os
from collections import OrderedDict

import numpy as np

from convreg.harness import SweepReport
from convreg.vsc import CHECKLIST_FLAGS

REPORT_KEYS = ('config', 'records', 'fitted_psi', 'rate_summary', 'tallies')
REPORT_FILENAME = 'report.json'
RECORDS_FILENAME = 'records.csv'

CSV_COLUMNS = (
    'delta', 'alpha', 'residual_norm', 'J_reg', 'J_true', 'jdiff',
    'bregman_fwd', 'bregman_rev', 'bregman_sym', 'total_error',
    'hm_lower', 'new_lower', 'alpha_max',
) + CHECKLIST_FLAGS

BOUND_COLUMNS = ('hm_lower', 'new_lower', 'alpha_max')


def _jsonable(value):
    """Replace numpy scalars and arrays by their python counterparts."""
    if isinstance(value, dict):
        return OrderedDict((key, _jsonable(item)) for key, item in value.items())
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def dumps(document):
    """Serialize a document deterministically (key order is kept)."""
    return json.dumps(_jsonable(document), indent=2, allow_nan=True) + '\n'


def write_json(document, path):
    with io.open(path, 'w', encoding='utf-8') as handle:
        handle.write(dumps(document))


def read_json(path):
    with io.open(path, encoding='utf-8') as handle:
        return json.load(handle, object_pairs_hook=OrderedDict)


def write_report(report, path):
    write_json(report.to_dict(), path)


def read_report(path):
    """Load a report written by write_report as a SweepReport.

    The config section is kept as the plain document it was written as.

    """
    document = read_json(path)
    missing = [key for key in REPORT_KEYS if key not in document]
    if missing:
        raise ValueError('report %s lacks the keys: %s' % (path, ', '.join(missing)))
    return SweepReport.from_dict(document)


def record_row(record):
    """CSV row of a record; flags are 0/1, missing values are empty."""
    row = OrderedDict()
    for column in CSV_COLUMNS:
        if column in CHECKLIST_FLAGS:
            if record.checklist is None:
                value = ''
            else:
                value = int(record.checklist.entries[column].holds)
        elif column in BOUND_COLUMNS:
            value = '' if record.bounds is None else getattr(record.bounds, column)
        else:
            value = getattr(record, column)
        row[column] = '' if value is None else value
    return row


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(report):
    output = io.StringIO()
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for record in report.records:
        writer.writerow([_format(value) for value in record_row(record).values()])
    return output.getvalue()


def write_records_csv(report, path):
    with io.open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(records_to_csv(report))


def read_records_csv(path):
    """Return the rows of a records CSV as dicts of floats (ints for flags,
    None for empty cells).

    """
    rows = []
    with io.open(path, encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError('unexpected columns in %s' % path)
        for raw in reader:
            row = OrderedDict()
            for column in CSV_COLUMNS:
                cell = raw[column]
                if cell == '':
                    row[column] = None
                elif column in CHECKLIST_FLAGS:
                    row[column] = int(cell)
                else:
                    row[column] = float(cell)
            rows.append(row)
    return rows


def write_sweep_outputs(report, out_dir):
    """Write report.json and records.csv into out_dir and return both paths."""
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    report_path = os.path.join(out_dir, REPORT_FILENAME)
    records_path = os.path.join(out_dir, RECORDS_FILENAME)
    write_report(report, report_path)
    write_records_csv(report, records_path)
    return report_path, records_path

import csv
import logging
import sys
from typing import Optional

import pandas as pd
from openpyxl import load_workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

logger = logging.getLogger(__name__)


def format_results_sheet(excel_file: str):
    """
    Style the results sheet of a workbook: bold shaded header, thin borders,
    widths fitted to the headers and a frozen header row.

    Args:
        excel_file (str): Path to Excel file
    """
    wb = load_workbook(excel_file)
    ws = wb.active
    header_row = 1

    thin_border = Border(
        left=Side(style='thin'),
        right=Side(style='thin'),
        top=Side(style='thin'),
        bottom=Side(style='thin')
    )

    for col in range(1, ws.max_column + 1):
        cell = ws.cell(row=header_row, column=col)
        cell.font = Font(bold=True, size=11)
        cell.fill = PatternFill(start_color="E7E6E6", end_color="E7E6E6", fill_type="solid")
        cell.alignment = Alignment(horizontal='center', vertical='center', wrap_text=True)
        cell.border = thin_border
    ws.row_dimensions[header_row].height = 30

    for row in range(header_row + 1, ws.max_row + 1):
        for col in range(1, ws.max_column + 1):
            cell = ws.cell(row=row, column=col)
            cell.border = thin_border
            if isinstance(cell.value, (int, float)):
                cell.alignment = Alignment(horizontal='right', vertical='center')
                cell.number_format = '0.000000'
            else:
                cell.alignment = Alignment(horizontal='center', vertical='center')

    for col in range(1, ws.max_column + 1):
        header = ws.cell(row=header_row, column=col).value
        width = max(14, len(str(header)) + 2) if header else 14
        ws.column_dimensions[get_column_letter(col)].width = width

    ws.freeze_panes = ws[f'A{header_row + 1}']
    wb.save(excel_file)


def write_table(df: pd.DataFrame, output_path: Optional[str] = None):
    """
    Write a result table as RFC-4180 CSV (stdout when no path) or as a formatted workbook.

    Column order is whatever `df` carries; callers fix it from CSV_COLUMNS.

    Args:
        df (pd.DataFrame): Result table
        output_path (str): Destination; a `.xlsx` suffix selects the workbook format
    """
    if output_path and output_path.lower().endswith('.xlsx'):
        df.to_excel(output_path, index=False, sheet_name='results')
        format_results_sheet(output_path)
    elif output_path:
        with open(output_path, 'w', newline='', encoding='utf-8') as f:
            df.to_csv(f, index=False, quoting=csv.QUOTE_MINIMAL, lineterminator='\r\n')
    else:
        df.to_csv(sys.stdout, index=False, quoting=csv.QUOTE_MINIMAL, lineterminator='\r\n')
    logger.info("wrote %d rows to %s", len(df), output_path or 'stdout')

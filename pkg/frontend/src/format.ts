// Display precision used everywhere a number is shown. Tests assert the
// rendered charts carry exactly these strings, so every pixel traces back
// to a service payload value.

export const DISPLAY_DECIMALS = 2;

export function formatValue(value: number): string {
  return value.toFixed(DISPLAY_DECIMALS);
}

export function formatMetadata(metadata: Record<string, unknown>): string[] {
  const names: Record<string, string> = {
    hoehn_yahr: "H&Y",
    freezer: "freezer",
    updrs_ii: "UPDRS-II",
    updrs_iii: "UPDRS-III",
    k_level: "K-level",
    amputated_side: "amputated",
  };
  const chips: string[] = [];
  for (const [key, label] of Object.entries(names)) {
    if (!(key in metadata)) continue;
    const value = metadata[key];
    if (typeof value === "boolean") {
      chips.push(value ? label : `non-${label}`);
    } else {
      chips.push(`${label} ${String(value)}`);
    }
  }
  return chips;
}

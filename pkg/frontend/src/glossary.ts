/**
 * Readable labels and value glossaries for the student attributes a
 * participant sees. Bundled statically; unknown values fall through
 * unchanged so schema additions degrade gracefully.
 */

export const FEATURE_LABELS: Record<string, string> = {
  failures: "Past class failures",
  higher: "Wants higher education",
  studytime: "Weekly study time",
  goout: "Going out with friends",
  schoolsup: "Extra educational support",
  absences: "School absences this year",
  Medu: "Mother's education",
  Fedu: "Father's education",
  Mjob: "Mother's job",
  Fjob: "Father's job",
  Dalc: "Workday alcohol use",
  Walc: "Weekend alcohol use",
  activities: "Extra-curricular activities",
  paid: "Extra paid classes",
  traveltime: "Home-to-school travel time",
  famrel: "Family relationship quality",
  freetime: "Free time after school",
  health: "Current health",
  internet: "Internet access at home",
  romantic: "In a romantic relationship",
  famsup: "Family educational support",
  nursery: "Attended nursery school",
  age: "Age",
  sex: "Sex",
  school: "School",
  address: "Home area",
  famsize: "Family size",
  Pstatus: "Parents' cohabitation",
  reason: "Reason for choosing school",
  guardian: "Guardian",
};

const EDUCATION_SCALE: Record<string, string> = {
  "0": "none",
  "1": "primary (4th grade)",
  "2": "5th to 9th grade",
  "3": "secondary",
  "4": "higher education",
};

const ONE_TO_FIVE: Record<string, string> = {
  "1": "very low",
  "2": "low",
  "3": "medium",
  "4": "high",
  "5": "very high",
};

const VALUE_GLOSSARIES: Record<string, Record<string, string>> = {
  Medu: EDUCATION_SCALE,
  Fedu: EDUCATION_SCALE,
  studytime: {
    "1": "under 2 hours",
    "2": "2 to 5 hours",
    "3": "5 to 10 hours",
    "4": "over 10 hours",
  },
  traveltime: {
    "1": "under 15 min",
    "2": "15 to 30 min",
    "3": "30 to 60 min",
    "4": "over 1 hour",
  },
  goout: ONE_TO_FIVE,
  famrel: { ...ONE_TO_FIVE, "1": "very bad", "2": "bad", "3": "fair", "4": "good", "5": "excellent" },
  freetime: ONE_TO_FIVE,
  Dalc: ONE_TO_FIVE,
  Walc: ONE_TO_FIVE,
  health: { ...ONE_TO_FIVE, "1": "very bad", "5": "very good" },
  Mjob: { at_home: "stays at home", other: "other" },
  Fjob: { at_home: "stays at home", other: "other" },
  address: { U: "urban", R: "rural" },
  famsize: { LE3: "3 or fewer", GT3: "more than 3" },
  Pstatus: { T: "living together", A: "apart" },
};

export function featureLabel(feature: string): string {
  return FEATURE_LABELS[feature] ?? feature;
}

export function featureValue(feature: string, value: string | number): string {
  const text = String(value);
  return VALUE_GLOSSARIES[feature]?.[text] ?? text;
}

/* TEMPLATE GENERATED TESTCASE FILE
Filename: CWE78_OS_Command_Injection__Property_05.java
Label Definition File: CWE78_OS_Command_Injection.label.xml
Template File: sources-sinks-point-flaw.tmpl.java
*/
/*
 * @description
 * CWE: 78 CWE78_OS_Command_Injection
 * BadSource: Property Read data from a system property
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: validate the argument against an allow-list before executing
 *    BadSink : exec dynamic command execution with Runtime.getRuntime().exec()
 * Flow Variant: point-flaw Data flow: if(privateTrue) and if(privateFalse)
 *
 * */

package testcases.CWE78_OS_Command_Injection;

import testcasesupport.*;
import javax.servlet.http.*;
import java.io.*;
import java.net.*;
import java.util.StringTokenizer;
import java.util.logging.Level;

public class CWE78_OS_Command_Injection__Property_05 extends AbstractTestCase
{
    private boolean privateTrue = true;
    private boolean privateFalse = false;

    public void bad() throws Throwable
    {
        String data;
        if (privateTrue)
        {
            data = System.getProperty("user.home");
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    public void good() throws Throwable
    {
        goodG2B();
        goodB2G();
    }

    /* goodG2B() - use goodsource and badsink */
    private void goodG2B() throws Throwable
    {
        String data;
        if (privateTrue)
        {
            data = "foo";
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    /* goodB2G() - use badsource and goodsink */
    private void goodB2G() throws Throwable
    {
        String data;
        if (privateTrue)
        {
            data = System.getProperty("user.home");
        }
        else
        {
            data = null;
        }
        String[] allowed = { "-l", "-a", "-la" };
                String argument = "-l";
                for (String candidate : allowed)
                {
                    if (candidate.equals(data))
                    {
                        argument = candidate;
                    }
                }
                IO.writeLine("listing with " + argument);
    }

    public static void main(String[] args) throws ClassNotFoundException,
           InstantiationException, IllegalAccessException
    {
        mainFromConsole(args);
    }
}
